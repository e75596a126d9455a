import numpy as np
from hypothesis import given, strategies as st

from horosol.perm import (as_perm, compose, cycle_type, cycles, generated_order, identity, inverse, is_perm,
                          is_transitive, orbit)
from strategies import perms


def test_compose_acts_on_the_left():
    s = np.array([1, 2, 0])
    t = np.array([1, 0, 2])
    # (s o t)(0) = s(t(0)) = s(1) = 2
    assert compose(s, t)[0] == 2


def test_cycles_start_at_least_point():
    assert cycles([2, 0, 1, 4, 3, 5]) == [(0, 2, 1), (3, 4), (5,)]
    assert cycle_type([2, 0, 1, 4, 3, 5]) == (3, 2, 1)


def test_is_perm_rejects_garbage():
    assert not is_perm([0, 0, 1])
    assert not is_perm([[0, 1]])
    assert is_perm(as_perm([2, 0, 1]))


def test_generated_order_s3_and_cyclic():
    assert generated_order([[1, 0, 2], [1, 2, 0]]) == 6
    assert generated_order([[1, 2, 3, 0]]) == 4
    assert generated_order([identity(5)]) == 1


def test_orbit_and_transitivity():
    gens = [np.array([1, 0, 2, 3]), np.array([0, 1, 3, 2])]
    assert sorted(orbit(gens, 0)) == [0, 1]
    assert not is_transitive(gens, 4)
    assert is_transitive([np.array([1, 2, 3, 0])], 4)


@given(st.integers(1, 8).flatmap(perms))
def test_inverse_roundtrip(p):
    assert np.array_equal(compose(p, inverse(p)), identity(len(p)))
    assert np.array_equal(compose(inverse(p), p), identity(len(p)))


@given(st.integers(1, 8).flatmap(perms))
def test_cycles_partition_points(p):
    cs = cycles(p)
    pts = sorted(x for c in cs for x in c)
    assert pts == list(range(len(p)))
    for c in cs:
        assert c[0] == min(c)
        for a, b in zip(c, c[1:] + c[:1]):
            assert p[a] == b
