import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from horosol.covering import build_example
from horosol.density import (MetricPoints, Y_LOW, build_grid, cusp_end, domain_mass, epsilon_density_report,
                             escape_experiment, grid_for, hausdorff_distance, haar_equidistribution_test,
                             metric_points, pairwise_distance, psl2_walk_generators, pushforward_experiment,
                             rectangle_mass)
from horosol.errors import ValidationError
from horosol.hyperbolic import (base_point, closed_horocycle_samples, direction, flow_context,
                                from_upper_half_plane, reduce)

scipy_integrate = pytest.importorskip("scipy.integrate")


# --- reference masses ----------------------------------------------------------------

def mass_oracle(x0, x1, y0, y1):
    f = lambda y, x: 1.0 / (y * y) if x * x + y * y >= 1 else 0.0
    lo = lambda x: max(y0, math.sqrt(max(0.0, 1 - x * x)))
    val, _ = scipy_integrate.dblquad(lambda y, x: 1.0 / (y * y), x0, x1, lambda x: min(lo(x), y1), lambda x: y1,
                                     epsabs=1e-12, epsrel=1e-10)
    return val


@pytest.mark.parametrize("rect", [(-0.5, 0.5, Y_LOW, 3.0), (-0.5, -0.2, Y_LOW, 0.95), (0.1, 0.45, 0.9, 1.2),
                                  (-0.3, 0.3, 1.5, 2.0), (0.0, 0.5, Y_LOW, 1.0)])
def test_rectangle_mass_against_quadrature(rect):
    assert rectangle_mass(*rect) == pytest.approx(mass_oracle(*rect), abs=1e-9)


def test_domain_mass_closed_form():
    # total of the truncated domain: pi/3 - 1/Y
    assert rectangle_mass(-0.5, 0.5, Y_LOW, 3.0) == pytest.approx(domain_mass(3.0), abs=1e-12)
    assert domain_mass(3.0) == pytest.approx(mass_oracle(-0.5, 0.5, Y_LOW, 3.0), abs=1e-9)


@given(st.integers(1, 12), st.integers(1, 12), st.floats(1.1, 10))
def test_grid_masses_sum_to_one(n_re, n_im, Y):
    g = build_grid(Y, n_re, n_im, 3, 2)
    assert g.masses().sum() == pytest.approx(1.0, abs=1e-12)
    raw_total = sum(rectangle_mass(g.x_edges[i], g.x_edges[i + 1], g.y_edges[j], g.y_edges[j + 1])
                    for i in range(n_re) for j in range(n_im))
    assert raw_total == pytest.approx(domain_mass(Y), rel=1e-12)


def test_grid_validation():
    with pytest.raises(ValidationError):
        build_grid(0.5, 2, 2, 2)
    with pytest.raises(ValidationError):
        build_grid(3.0, 0, 2, 2)


# --- epsilon-density reports ------------------------------------------------------

def test_report_empty():
    g = build_grid(3.0, 4, 4, 2)
    r = epsilon_density_report([], [], [], np.array([], dtype=np.int64), g)
    assert r.coverage == 0.0


def test_report_cell_centers_cover_everything():
    g = build_grid(3.0, 4, 4, 2, fiber_size=3)
    xs, ys, ts, fs = [], [], [], []
    mass = g.masses().reshape(g.shape)
    for i in range(4):
        for j in range(4):
            for k in range(2):
                for f in range(3):
                    if mass[i, j, k, f] > 0:
                        x = (g.x_edges[i] + g.x_edges[i + 1]) / 2
                        yc = (g.y_edges[j] + g.y_edges[j + 1]) / 2
                        xs.append(x)
                        # keep the representative inside the domain for the bottom row
                        ys.append(max(yc, math.sqrt(max(0.0, 1 - x * x)) + 1e-9 if j == 0 else yc))
                        ts.append((k + 0.5) * math.pi)
                        fs.append(f)
    r = epsilon_density_report(xs, ys, ts, np.array(fs), g)
    assert r.coverage == 1.0
    assert math.isfinite(r.discrepancy)


@given(st.integers(0, 2 ** 32 - 1))
def test_report_is_order_invariant(seed):
    rng = np.random.default_rng(seed)
    g = build_grid(3.0, 5, 5, 4, fiber_size=2)
    n = 300
    x, y = rng.uniform(-0.5, 0.5, n), rng.uniform(0.9, 3.5, n)
    th, f = rng.uniform(0, 2 * np.pi, n), rng.integers(0, 2, n)
    perm = rng.permutation(n)
    a = epsilon_density_report(x, y, th, f, g, mass_floor=1e-3)
    b = epsilon_density_report(x[perm], y[perm], th[perm], f[perm], g, mass_floor=1e-3)
    assert a == b


def test_pushforward_recount_oracle():
    """Recount a pushed horocycle one sample at a time with the pure-Python
    reduction and the deck word's action on the fiber."""
    t = build_example("class2", 1)
    ctx = flow_context(t, 1)
    grid = grid_for(ctx, 3.0, 6, 6, 4, 1)
    N, y0, tt, seed = 3000, 1.0, -8.0, 11
    (_, rep), = pushforward_experiment(ctx, y0, [tt], N, grid, seed=seed)

    offset = float(np.random.default_rng(seed).random())
    Y = y0 * math.exp(tt)
    width = ctx.top.closed_width(0)
    fa = ctx.top
    counts = {}
    for k in range(N):
        s = (k + offset) * width / (N * Y)
        R, w = reduce(from_upper_half_plane(s * Y, Y)[0])  # h_s moves Re z by Y s
        pt = 0
        for g, e in reversed(w.applied().letters):
            pt = int(fa.s_perm[pt]) if g == "S" else int(fa.t_power(pt, e))
        x, y = (float(v[0]) for v in base_point(R))
        th = float(direction(R)[0])
        if y > grid.Y_max:
            continue
        ix = min(max(int(np.searchsorted(grid.x_edges, x, side="right")) - 1, 0), 5)
        iy = min(max(int(np.searchsorted(grid.y_edges, y, side="right")) - 1, 0), 5)
        it = min(int(th * 4 / (2 * math.pi)), 3)
        key = (ix, iy, it, pt)
        counts[key] = counts.get(key, 0) + 1
    mass = grid.masses().reshape(grid.shape)
    hit = sum(1 for key in counts if mass[key] > 0)
    assert rep.n_in_grid == sum(counts.values())
    assert rep.coverage == pytest.approx(hit / int((mass > 0).sum()), abs=0)


def test_pushforward_high_horocycle_stays_in_cusp():
    ctx = flow_context(build_example("class2", 1), 1)
    grid = grid_for(ctx, 3.0, 8, 8, 4, 1)
    (_, rep), = pushforward_experiment(ctx, 2.0, [0.0], 10_000, grid)
    assert rep.min_height == pytest.approx(2.0)
    assert rep.coverage < 0.2


def test_pushforward_validation():
    ctx = flow_context(build_example("class2", 1), 1)
    grid = grid_for(ctx, 3.0, 4, 4, 2, 1)
    with pytest.raises(ValidationError):
        pushforward_experiment(ctx, 1.0, [-2.0, -1.0], 100, grid)
    with pytest.raises(ValidationError):
        pushforward_experiment(ctx, 1.0, [-1.0], 100, build_grid(3.0, 4, 4, 2, 5, 1))


# --- compactified metric and Hausdorff distance ---------------------------------------

def _random_points(rng, ctx, n):
    M = from_upper_half_plane(rng.uniform(-3, 3, n), np.exp(rng.uniform(-2, 3, n)), rng.uniform(0, 6.28, n))
    from horosol._kernels import reduce_batch

    R, addr, _ = reduce_batch(M, rng.integers(0, ctx.top.size, n), ctx.top.tables)
    return metric_points(ctx, R, ctx.addresses(addr))


def _sub(P, idx):
    return MetricPoints(P.x[idx], P.y[idx], P.theta[idx], P.addr[idx], P.ray[idx])


def hausdorff_oracle(A, B):
    def d(i, j):
        return float(pairwise_distance(_sub(A, [i]), _sub(B, [j]))[0, 0])
    ab = max(min(d(i, j) for j in range(len(B))) for i in range(len(A)))
    ba = max(min(d(i, j) for i in range(len(A))) for j in range(len(B)))
    return max(ab, ba)


CTX = flow_context(build_example("class3", 2))


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6), st.integers(1, 6))
def test_hausdorff_matches_quadratic_oracle(seed, na, nb):
    rng = np.random.default_rng(seed)
    A, B = _random_points(rng, CTX, na), _random_points(rng, CTX, nb)
    assert hausdorff_distance(A, B) == pytest.approx(hausdorff_oracle(A, B), abs=1e-15)


@given(st.integers(0, 2 ** 32 - 1))
def test_hausdorff_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (_random_points(rng, CTX, int(rng.integers(1, 8))) for _ in range(3))
    assert hausdorff_distance(A, C) <= hausdorff_distance(A, B) + hausdorff_distance(B, C) + 1e-12


@given(st.integers(0, 2 ** 32 - 1))
def test_metric_is_symmetric_and_zero_on_diagonal(seed):
    rng = np.random.default_rng(seed)
    A = _random_points(rng, CTX, 5)
    D = pairwise_distance(A, A)
    assert np.allclose(D, D.T)
    assert np.allclose(np.diag(D), 0)
    assert hausdorff_distance(A, A) == 0.0


def test_singletons_and_empty():
    rng = np.random.default_rng(0)
    A, B = _random_points(rng, CTX, 1), _random_points(rng, CTX, 1)
    assert hausdorff_distance(A, B) == pytest.approx(float(pairwise_distance(A, B)[0, 0]))
    with pytest.raises(ValidationError):
        hausdorff_distance(A, _sub(B, []))


def test_end_distance_closed_form():
    end = cusp_end(CTX)
    M, addr = closed_horocycle_samples(8.0, 50, CTX)
    assert hausdorff_distance(metric_points(CTX, M, addr), end) == pytest.approx(1 / 8.0, abs=1e-12)


# --- escape ------------------------------------------------------------------------

def test_height_one_horocycle():
    M, _ = closed_horocycle_samples(1.0, 200)
    assert np.allclose(base_point(M)[1], 1.0)


def test_escape_heights_and_distances():
    res = escape_experiment(1.0, [5.0, 5.0 + math.log(2)], N=500)
    assert res[0]["min_height"] == pytest.approx(math.exp(5), abs=1e-6)
    assert res[0]["end_distance"] == pytest.approx(math.exp(-5), abs=1e-6)
    assert res[1]["end_distance"] == pytest.approx(res[0]["end_distance"] / 2, rel=1e-9)


def test_escape_in_a_tower():
    res = escape_experiment(1.0, [2.0, 4.0], N=400, tower=build_example("class2", 2))
    for r in res:
        assert r["min_height"] == pytest.approx(math.exp(r["t"]), abs=1e-6)
        assert r["end_distance"] == pytest.approx(math.exp(-r["t"]), abs=1e-6)


def test_escape_requires_positive_times():
    with pytest.raises(ValidationError):
        escape_experiment(1.0, [0.0])


# --- Haar ----------------------------------------------------------------------------

def test_haar_singleton_fiber():
    assert haar_equidistribution_test([np.zeros(1, dtype=np.int64)] * 2, [10], 1000) == {10: 0.0}


def test_haar_class2_level1():
    t = build_example("class2", 1)
    tv = haar_equidistribution_test(t.levels[1].perms, [50], 100_000, seed=0)
    assert tv[50] <= 0.02


def test_haar_psl2_mod2():
    tv = haar_equidistribution_test(psl2_walk_generators(2), [50], 100_000, seed=0)
    assert tv[50] <= 0.05


def test_haar_tv_decreases_with_length():
    tv = haar_equidistribution_test(psl2_walk_generators(3), [1, 50], 50_000, seed=1)
    assert tv[50] < tv[1]
