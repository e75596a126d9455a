import itertools

import pytest
from hypothesis import given, strategies as st

from horosol.linalg_mod import kernel_vector_mod, smith_normal_form, solve_mod

small_matrix = st.integers(1, 3).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=r, max_size=r)))


def _det(M):
    if len(M) == 1:
        return M[0][0]
    return sum((-1) ** j * M[0][j] * _det([row[:j] + row[j + 1:] for row in M[1:]]) for j in range(len(M)))


def _mul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


@given(small_matrix)
def test_smith_form_factorization(A):
    U, D, V = smith_normal_form(A)
    assert _mul(_mul(U, A), V) == D
    assert abs(_det(U)) == 1 and abs(_det(V)) == 1
    for i, row in enumerate(D):
        for j, v in enumerate(row):
            if i != j:
                assert v == 0


@given(small_matrix, st.integers(2, 6), st.data())
def test_solve_mod_against_brute_force(A, m, data):
    n = len(A[0])
    t = data.draw(st.lists(st.integers(0, m - 1), min_size=len(A), max_size=len(A)))
    sol = solve_mod(A, t, m)
    brute = any(all(sum(a * x for a, x in zip(row, xs)) % m == ti for row, ti in zip(A, t))
                for xs in itertools.product(range(m), repeat=n))
    assert (sol is not None) == brute
    if sol is not None:
        assert all(sum(a * x for a, x in zip(row, sol)) % m == ti % m for row, ti in zip(A, t))


@given(small_matrix, st.integers(2, 6))
def test_kernel_vector_is_nonzero_kernel_element(A, m):
    v = kernel_vector_mod(A, m)
    if v is not None:
        assert any(v)
        assert all(sum(a * x for a, x in zip(row, v)) % m == 0 for row in A)


def test_no_equations_rejected():
    with pytest.raises(ValueError):
        solve_mod([], [], 3)
