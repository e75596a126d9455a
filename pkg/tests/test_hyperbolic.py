import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from horosol.covering import build_example
from horosol.errors import InvariantError, ValidationError
from horosol.hyperbolic import (DeckWord, SolenoidPoint, base_point, check_addresses, closed_horocycle_matrices,
                                closed_horocycle_samples, direction, flow_context, flow_solenoid,
                                from_upper_half_plane, geodesic_flow, geodesic_matrix, horocycle_flow,
                                horocycle_matrix, in_fundamental_domain, make_point, matmul, normalize, reduce,
                                samples_csv)

finite = st.floats(-5, 5, allow_nan=False)


@given(finite, finite)
def test_geodesic_conjugates_horocycle(t, s):
    lhs = matmul(geodesic_matrix(t), horocycle_matrix(s))
    rhs = matmul(horocycle_matrix(s * math.exp(t)), geodesic_matrix(t))
    assert np.allclose(lhs, rhs, atol=1e-9, rtol=1e-12)


@given(st.floats(-20, 20), st.floats(1e-4, 50), st.floats(0, 2 * math.pi - 1e-9))
def test_upper_half_plane_coordinates(x, y, theta):
    M = from_upper_half_plane(x, y, theta)
    bx, by = base_point(M)
    assert math.isclose(bx[0], x, abs_tol=1e-9 * max(1, abs(x)))
    assert math.isclose(by[0], y, rel_tol=1e-9)
    d = direction(M)[0]
    assert min(abs(d - theta), 2 * math.pi - abs(d - theta)) < 1e-7


@given(st.floats(-30, 30), st.floats(1e-5, 10), st.floats(0, 6.28))
def test_reduce_roundtrip(x, y, theta):
    M = from_upper_half_plane(x, y, theta)[0]
    R, w = reduce(M)
    assert in_fundamental_domain(R)[0]
    back = normalize(matmul(w.matrix(), R))[0]
    assert np.allclose(back, normalize(M)[0], atol=1e-7 * max(1.0, np.abs(M).max() ** 2))


def test_reduce_word_convention():
    R, w = reduce(from_upper_half_plane(1.0, 1.0))
    assert str(w) == "T"
    assert str(w.applied()) == "T^-1"
    assert np.allclose(np.ravel(base_point(R)), [0.0, 1.0])
    _, w = reduce(from_upper_half_plane(0.0, 0.5))
    assert str(w) == "S"


def test_flows_preserve_determinant():
    M = from_upper_half_plane(0.1, 2.0, 1.0)
    for _ in range(1000):
        M = horocycle_flow(geodesic_flow(M, 1e-3), 1e-3)
    det = M[0, 0] * M[0, 3] - M[0, 1] * M[0, 2]
    assert abs(det - 1) < 1e-12


def test_normalize_rejects_singular():
    with pytest.raises(ValidationError):
        normalize([1, 1, 1, 1])


def test_solenoid_point_validation():
    with pytest.raises(InvariantError, match="fundamental domain"):
        SolenoidPoint(from_upper_half_plane(0.0, 0.2)[0], (0,))


@pytest.mark.parametrize("name", ["class2", "class3", "congruence"])
def test_closed_horocycle_period(name):
    t = build_example(name, 2)
    ctx = flow_context(t)
    y = 3.0
    p = make_point(ctx, from_upper_half_plane(0.0, y))
    width = ctx.top.closed_width(p.address[-1])
    q = flow_solenoid(p, ctx, s=width / y)
    assert q.address == p.address
    assert np.allclose(q.base, p.base, atol=1e-9)
    # a partial loop generally changes the address once the width exceeds 1
    if width > 1:
        r = flow_solenoid(p, ctx, s=1.0 / y)
        assert r.address != p.address


def test_flow_round_trip():
    ctx = flow_context(build_example("class2", 2))
    p = make_point(ctx, from_upper_half_plane(0.2, 1.3, 0.4))
    q = flow_solenoid(flow_solenoid(p, ctx, t=2.5, s=0.7), ctx, s=-0.7 * math.exp(0))
    q = flow_solenoid(q, ctx, t=-2.5)
    assert q.address == p.address
    assert np.allclose(q.base, p.base, atol=1e-8)


def test_address_compatibility_check():
    ctx = flow_context(build_example("class2", 2))
    with pytest.raises(InvariantError, match="address compatibility"):
        check_addresses(ctx, (0, 0, 7))


def test_closed_horocycle_samples_high_up():
    ctx = flow_context(build_example("class3", 2))
    M, addr = closed_horocycle_samples(5.0, 100, ctx)
    x, y = base_point(M)
    assert np.allclose(y, 5.0)
    assert addr.shape == (100, 3)
    text = samples_csv(M[:2], addr[:2])
    assert text.splitlines()[0] == "re,im,theta,level0_addr,level1_addr,level2_addr"


def test_closed_horocycle_matrices_validation():
    with pytest.raises(ValidationError):
        closed_horocycle_matrices(-1.0, 10)


def test_deck_word_inverse():
    w = DeckWord((("T", 2), ("S", 1), ("T", -1)))
    prod = matmul(w.matrix(), w.inverse().matrix())[0]
    assert np.allclose(np.abs(prod), [1, 0, 0, 1])


@given(st.floats(-30, 30), st.floats(1e-4, 10), st.integers(0, 23))
def test_deck_word_moves_address_like_kernel(x, y, x0):
    from horosol._kernels import reduce_batch

    ctx = flow_context(build_example("class2", 2))
    fa = ctx.top
    M = from_upper_half_plane(x, y)
    _, addr, _ = reduce_batch(M, [x0], fa.tables)
    _, w = reduce(M[0])
    pt = x0
    for g, e in reversed(w.applied().letters):  # rightmost letter acts first
        pt = int(fa.s_perm[pt]) if g == "S" else int(fa.t_power(pt, e))
    assert pt == addr[0]
