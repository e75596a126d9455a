"""Cell grids over the truncated fundamental domain, epsilon-density and
discrepancy of pushed closed horocycles, escape to the cuspidal end, the
compactified metric, Hausdorff distance and a random-walk equidistribution test.

Cells are products of a rectangle in ``(Re z, Im z)``, an angle bin and a fiber
value (an address in ``X_L``).  Reference masses are ``dx dy / y^2`` over the
part of the rectangle inside the domain, uniform in angle and fiber.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .hyperbolic import FlowContext, base_point, closed_horocycle_matrices, direction, flow_context
from ._kernels import reduce_batch

Y_LOW = math.sqrt(3) / 2
CHUNK = 1 << 18


# --- reference masses ------------------------------------------------------------

def _G(u: float, y0: float, y1: float) -> float:
    """``int_0^u g(x) dx`` for ``g(x) = (1/max(y0, sqrt(1-x^2)) - 1/y1)_+``, odd in ``u``."""
    if u < 0:
        return -_G(-u, y0, y1)
    b1 = math.sqrt(1 - y1 * y1) if y1 < 1 else 0.0
    b0 = math.sqrt(1 - y0 * y0) if y0 < 1 else 0.0
    out = 0.0
    if u > b1 and b0 > b1:
        v = min(u, b0)
        out += math.asin(v) - math.asin(b1) - (v - b1) / y1
    if u > b0:
        out += (u - max(b0, b1)) * (1 / y0 - 1 / y1)
    return out


def rectangle_mass(x0: float, x1: float, y0: float, y1: float) -> float:
    """``int int dx dy / y^2`` over ``[x0,x1] x [y0,y1]`` intersected with ``|z| >= 1``."""
    if not (x0 <= x1 and 0 < y0 <= y1):
        raise ValidationError("degenerate rectangle")
    if abs(x0) > 1 or abs(x1) > 1:
        raise ValidationError("rectangle must lie in |x| <= 1")
    return _G(x1, y0, y1) - _G(x0, y0, y1)


def domain_mass(Y_max: float) -> float:
    """Total ``dx dy / y^2`` mass of the domain truncated at ``Im z = Y_max``."""
    return math.pi / 3 - 1 / Y_max


@dataclass(frozen=True, eq=False)
class CellGrid:
    x_edges: np.ndarray
    y_edges: np.ndarray
    n_theta: int
    fiber_size: int
    level: int = 0
    base_mass: np.ndarray = field(repr=False, default=None)  # (n_re, n_im), normalized

    @property
    def shape(self):
        return (len(self.x_edges) - 1, len(self.y_edges) - 1, self.n_theta, self.fiber_size)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def Y_max(self) -> float:
        return float(self.y_edges[-1])

    def masses(self) -> np.ndarray:
        """Flat array of cell masses (index order x, y, theta, fiber)."""
        per = self.base_mass / (self.n_theta * self.fiber_size)
        return np.repeat(per.reshape(-1), self.n_theta * self.fiber_size)

    def cell_index(self, x, y, theta, fiber) -> np.ndarray:
        """Flat cell index per sample, -1 for samples above ``Y_max``."""
        nx, ny, nt, nf = self.shape
        ix = np.clip(np.searchsorted(self.x_edges, x, side="right") - 1, 0, nx - 1)
        iy = np.clip(np.searchsorted(self.y_edges, y, side="right") - 1, 0, ny - 1)
        it = np.clip((np.asarray(theta) * (nt / (2 * np.pi))).astype(np.int64), 0, nt - 1)
        f = np.asarray(fiber, dtype=np.int64)
        if (f < 0).any() or (f >= nf).any():
            raise ValidationError("fiber value outside the grid")
        idx = ((ix * ny + iy) * nt + it) * nf + f
        return np.where(np.asarray(y) <= self.Y_max, idx, -1)

    def as_dict(self) -> dict:
        return {"x_edges": self.x_edges.tolist(), "y_edges": self.y_edges.tolist(),
                "n_theta": self.n_theta, "fiber_size": self.fiber_size, "level": self.level,
                "domain_mass": domain_mass(self.Y_max)}


def build_grid(Y_max: float, n_re: int, n_im: int, n_theta: int, fiber_size: int = 1, level: int = 0,
               y_edges=None, x_edges=None) -> CellGrid:
    """Grid over ``{|Re z| <= 1/2, |z| >= 1, Im z <= Y_max}`` x angle bins x fiber."""
    if Y_max <= 1:
        raise ValidationError("Y_max must exceed 1")
    if min(n_re, n_im, n_theta, fiber_size) < 1:
        raise ValidationError("every bin count must be >= 1")
    xe = np.linspace(-0.5, 0.5, n_re + 1) if x_edges is None else np.asarray(x_edges, dtype=np.float64)
    ye = np.linspace(Y_LOW, Y_max, n_im + 1) if y_edges is None else np.asarray(y_edges, dtype=np.float64)
    if len(xe) < 2 or len(ye) < 2 or (np.diff(xe) <= 0).any() or (np.diff(ye) <= 0).any():
        raise ValidationError("bin edges must be strictly increasing")
    if xe[0] < -0.5 - 1e-12 or xe[-1] > 0.5 + 1e-12 or ye[0] < Y_LOW - 1e-12:
        raise ValidationError("grid must lie inside the fundamental domain's bounding box")
    raw = np.array([[rectangle_mass(xe[i], xe[i + 1], ye[j], ye[j + 1]) for j in range(len(ye) - 1)]
                    for i in range(len(xe) - 1)])
    total = raw.sum()
    if total <= 0:
        raise ValidationError("grid does not meet the fundamental domain")
    return CellGrid(xe, ye, int(n_theta), int(fiber_size), int(level), raw / total)


# --- reports ---------------------------------------------------------------------

@dataclass(frozen=True)
class DensityReport:
    coverage: float
    max_missed_mass: float
    discrepancy: float
    n_samples: int
    n_in_grid: int
    floor_cells: int
    min_height: float
    fiber_hits: tuple = ()

    def to_json(self) -> dict:
        return {"coverage": self.coverage, "max_missed_mass": self.max_missed_mass,
                "discrepancy": self.discrepancy, "n_samples": self.n_samples, "n_in_grid": self.n_in_grid,
                "floor_cells": self.floor_cells, "min_height": self.min_height,
                "fiber_hits": list(self.fiber_hits)}


def _report(counts: np.ndarray, grid: CellGrid, n_samples: int, min_height: float, fiber_hits,
            mass_floor: float) -> DensityReport:
    mass = grid.masses()
    pos = mass > 0
    hit = counts > 0
    n_pos = int(pos.sum())
    coverage = float((hit & pos).sum() / n_pos) if n_pos else 0.0
    missed = pos & ~hit
    max_missed = float(mass[missed].max()) if missed.any() else 0.0
    n_in = int(counts.sum())
    emp = counts / n_in if n_in else np.zeros_like(mass)
    floor = mass >= mass_floor
    disc = float((np.abs(emp[floor] - mass[floor]) / mass[floor]).max()) if floor.any() else 0.0
    return DensityReport(coverage, max_missed, disc, int(n_samples), n_in, int(floor.sum()),
                         float(min_height), tuple(int(v) for v in fiber_hits))


def epsilon_density_report(x, y, theta, fiber, grid: CellGrid, mass_floor: float = 1e-3) -> DensityReport:
    """Coverage, largest missed mass and relative discrepancy of a sample set.

    ``discrepancy`` is taken over cells of reference mass ``>= mass_floor``;
    it is 0 when no cell reaches the floor (see ``floor_cells``).
    """
    x, y, theta, fiber = (np.asarray(v) for v in (x, y, theta, fiber))
    counts = np.zeros(grid.n_cells, dtype=np.int64)
    fiber_hits = np.zeros(grid.fiber_size, dtype=np.int64)
    for k in range(0, len(x), CHUNK):
        sl = slice(k, k + CHUNK)
        idx = grid.cell_index(x[sl], y[sl], theta[sl], fiber[sl])
        counts += np.bincount(idx[idx >= 0], minlength=grid.n_cells)
        fiber_hits += np.bincount(fiber[sl], minlength=grid.fiber_size)
    min_h = float(y.min()) if len(y) else math.inf
    return _report(counts, grid, len(x), min_h, fiber_hits, mass_floor)


def _push_counts(ctx: FlowContext, Y: float, N: int, offset: float, grid: CellGrid, backend=None):
    width = ctx.top.closed_width(0)
    counts = np.zeros(grid.n_cells, dtype=np.int64)
    fiber_hits = np.zeros(grid.fiber_size, dtype=np.int64)
    min_h = math.inf
    for k in range(0, N, CHUNK):
        n = min(CHUNK, N - k)
        M = _chunk_matrices(Y, N, width, offset, k, n)
        R, addr, _ = reduce_batch(M, np.zeros(n, dtype=np.int64), ctx.top.tables, backend=backend)
        fib = ctx.project(addr, grid.level) if grid.level != ctx.depth else addr
        x, y = base_point(R)
        idx = grid.cell_index(x, y, direction(R), fib)
        counts += np.bincount(idx[idx >= 0], minlength=grid.n_cells)
        fiber_hits += np.bincount(fib, minlength=grid.fiber_size)
        min_h = min(min_h, float(y.min()))
    return counts, fiber_hits, min_h


def _chunk_matrices(Y, N, width, offset, k, n):
    s = (np.arange(k, k + n, dtype=np.float64) + offset) * (width / (N * Y))
    r = math.sqrt(Y)
    M = np.empty((n, 4))
    M[:, 0], M[:, 1], M[:, 2], M[:, 3] = r, s * r, 0.0, 1 / r
    return M


def grid_for(ctx: FlowContext, Y_max: float, n_re: int, n_im: int, n_theta: int, level: int | None = None) -> CellGrid:
    L = ctx.depth if level is None else level
    return build_grid(Y_max, n_re, n_im, n_theta, ctx.actions[L].size, L)


def pushforward_experiment(tower, y0: float, t_list, N: int, grid: CellGrid, seed: int = 0,
                           mass_floor: float = 1e-3, backend: str | None = None) -> list[tuple[float, DensityReport]]:
    """Push the closed horocycle at height ``y0`` by ``g_t`` for each ``t``.

    ``g_t`` of the horocycle at height ``y0`` is the horocycle at height
    ``y0 e^t``; it is sampled at ``N`` equally spaced parameters with a seeded
    offset, reduced with fiber tracking and counted on ``grid``.
    """
    t_list = [float(t) for t in t_list]
    if any(b >= a for a, b in zip(t_list, t_list[1:])):
        raise ValidationError("t values must be strictly decreasing")
    if y0 <= 0 or N < 1:
        raise ValidationError("need y0 > 0 and N >= 1")
    ctx = tower if isinstance(tower, FlowContext) else flow_context(tower, grid.level)
    if ctx.actions[grid.level].size != grid.fiber_size:
        raise ValidationError("grid fiber size does not match the tower level")
    rng = np.random.default_rng(seed)
    out = []
    for t in t_list:
        offset = float(rng.random())
        counts, fiber_hits, min_h = _push_counts(ctx, y0 * math.exp(t), N, offset, grid, backend)
        out.append((t, _report(counts, grid, N, min_h, fiber_hits, mass_floor)))
    return out


# --- compactified metric -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MetricPoints:
    """Points of the compactification: interior points and cuspidal ends.

    ``addr[:, n]`` is the level-``n`` address and ``ray[:, n]`` the level-``n``
    cusp (T-cycle) it lies on; ends have ``y = inf`` and only a ray.
    """

    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    addr: np.ndarray
    ray: np.ndarray

    def __len__(self):
        return len(self.x)

    @property
    def eta(self):
        with np.errstate(divide="ignore"):
            return np.minimum(1.0, 1.0 / self.y)

    @property
    def kappa(self):
        return np.maximum(0.0, 1.0 - self.y)

    @property
    def v(self):
        lat = np.pi * np.nan_to_num(self.x) / 2
        th = np.nan_to_num(self.theta)
        return np.stack([np.cos(lat) * np.cos(th), np.cos(lat) * np.sin(th), np.sin(lat)], axis=1)


def metric_points(ctx: FlowContext, M, addresses) -> MetricPoints:
    x, y = base_point(M)
    addresses = np.atleast_2d(np.asarray(addresses, dtype=np.int64))
    ray = np.stack([ctx.actions[n].t_start[addresses[:, n]] for n in range(addresses.shape[1])], axis=1)
    return MetricPoints(x, y, direction(M), addresses, ray)


def cusp_end(ctx: FlowContext, address=None) -> MetricPoints:
    """The cuspidal end reached by flowing up from the given address (default basepoint)."""
    L = ctx.depth
    address = np.zeros(L + 1, dtype=np.int64) if address is None else np.asarray(address, dtype=np.int64)
    ray = np.array([[ctx.actions[n].t_start[address[n]] for n in range(L + 1)]])
    nan = np.array([np.nan])
    return MetricPoints(nan, np.array([np.inf]), nan, -np.ones((1, L + 1), dtype=np.int64), ray)


def _first_diff_weight(P, Q):
    """``2^-k`` for the first level ``k`` where rows differ, 0 if equal (pairwise)."""
    diff = P[:, None, :] != Q[None, :, :]
    any_diff = diff.any(axis=2)
    k = np.argmax(diff, axis=2)
    return np.where(any_diff, 2.0 ** (-k), 0.0)


def pairwise_distance(A: MetricPoints, B: MetricPoints) -> np.ndarray:
    """``d = |k_p - k_q| + |e_p - e_q| + min(e_p, e_q) delta + rho``.

    ``e = min(1, 1/y)``, ``k = max(0, 1 - y)``, ``delta = max(|v_p - v_q|/2,
    2^-(first differing address level))`` and ``rho = 2^-(first differing cusp
    level)``; ``v`` places ``(x, theta)`` on the unit sphere.
    """
    ea, eb = A.eta, B.eta
    ka, kb = A.kappa, B.kappa
    chord = np.linalg.norm(A.v[:, None, :] - B.v[None, :, :], axis=2) / 2
    delta = np.maximum(chord, _first_diff_weight(A.addr, B.addr))
    m = np.minimum(ea[:, None], eb[None, :])
    rho = _first_diff_weight(A.ray, B.ray)
    return np.abs(ka[:, None] - kb[None, :]) + np.abs(ea[:, None] - eb[None, :]) + \
        np.where(m > 0, m * delta, 0.0) + rho


def _subset(P: MetricPoints, sl) -> MetricPoints:
    return MetricPoints(P.x[sl], P.y[sl], P.theta[sl], P.addr[sl], P.ray[sl])


def directed_hausdorff(A: MetricPoints, B: MetricPoints, chunk: int = 2048) -> float:
    out = 0.0
    for k in range(0, len(A), chunk):
        D = pairwise_distance(_subset(A, slice(k, k + chunk)), B)
        out = max(out, float(D.min(axis=1).max()))
    return out


def hausdorff_distance(A: MetricPoints, B: MetricPoints) -> float:
    if len(A) == 0 or len(B) == 0:
        raise ValidationError("Hausdorff distance needs non-empty sets")
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


def escape_experiment(y0: float, t_list, N: int = 1000, tower=None, seed: int = 0,
                      backend: str | None = None) -> list[dict]:
    """Per ``t``: minimum reduced height of the pushed horocycle and its
    Hausdorff distance to the cuspidal end above the basepoint."""
    t_list = [float(t) for t in t_list]
    if any(t <= 0 for t in t_list):
        raise ValidationError("escape times must be positive")
    ctx = tower if isinstance(tower, FlowContext) else flow_context(tower)
    rng = np.random.default_rng(seed)
    end = cusp_end(ctx)
    out = []
    for t in t_list:
        Y = y0 * math.exp(t)
        M = closed_horocycle_matrices(Y, N, ctx.top.closed_width(0), float(rng.random()))
        R, addr, _ = reduce_batch(M, np.zeros(N, dtype=np.int64), ctx.top.tables, backend=backend)
        pts = metric_points(ctx, R, ctx.addresses(addr))
        out.append({"t": t, "min_height": float(pts.y.min()), "end_distance": hausdorff_distance(pts, end)})
    return out


# --- random-walk equidistribution --------------------------------------------------

def haar_equidistribution_test(perms, lengths=(50,), samples: int = 100_000, seed: int = 0,
                               basepoint: int = 0) -> dict:
    """Total-variation distance to uniform of ``w . basepoint`` for random words.

    Letters are drawn uniformly from the generators and their inverses; one
    distance is reported per word length.
    """
    perms = [np.asarray(p, dtype=np.int64) for p in perms]
    if not perms:
        raise ValidationError("need at least one generator")
    d = len(perms[0])
    tables = np.stack(perms + [np.argsort(p) for p in perms])
    rng = np.random.default_rng(seed)
    out = {}
    for ell in sorted(int(v) for v in lengths):
        x = np.full(samples, basepoint, dtype=np.int64)
        letters = rng.integers(0, len(tables), size=(ell, samples))
        for k in range(ell):
            x = tables[letters[k], x]
        freq = np.bincount(x, minlength=d) / samples
        out[ell] = 0.5 * float(np.abs(freq - 1.0 / d).sum())
    return out


def psl2_walk_generators(n: int):
    """Left multiplication by ``S`` and ``U = S T`` on ``PSL(2, Z/n)``.

    ``U`` has order 3, so walks in these letters are aperiodic (all of
    ``S, T^{+-1}`` are odd permutations of ``PSL(2, Z/2)``)."""
    from .congruence import PSL2Mod

    G = PSL2Mod(n)
    S = G.validate((0, -1, 1, 0))
    U = G.mul(S, G.validate((1, 1, 0, 1)))
    return [np.array([G.act(g, i) for i in range(len(G))], dtype=np.int64) for g in (S, U)]
