"""PSL(2,R) points, geodesic and horocycle flows, reduction into the standard
fundamental domain of PSL(2,Z), and solenoid points carrying fiber addresses.

A matrix ``[[a, b], [c, d]]`` is stored as the row ``(a, b, c, d)``.  Its base
point is ``z = (a i + b) / (c i + d)`` and its direction is
``theta = pi/2 - 2 arg(c i + d)``.  Flows act by right multiplication.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import MAX_STEPS, reduce_batch
from .covering import Tower
from .errors import InvariantError, ValidationError
from .fuchsian import FiberAction, cycle_tables, fiber_action, project_address, realization_for


def normalize(M) -> np.ndarray:
    """Renormalize to determinant 1 and fix the sign (first nonzero of the top row positive)."""
    M = np.array(M, dtype=np.float64).reshape(-1, 4)
    det = M[:, 0] * M[:, 3] - M[:, 1] * M[:, 2]
    if (det <= 0).any():
        raise ValidationError("matrix with non-positive determinant")
    M /= np.sqrt(det)[:, None]
    neg = (M[:, 0] < 0) | ((M[:, 0] == 0) & (M[:, 1] < 0))
    M[neg] *= -1
    return M


def matmul(M, N) -> np.ndarray:
    """Row-wise 2x2 products of ``(n, 4)`` arrays (broadcasting a single row)."""
    M = np.asarray(M, dtype=np.float64).reshape(-1, 4)
    N = np.asarray(N, dtype=np.float64).reshape(-1, 4)
    a, b, c, d = M.T
    e, f, g, h = N.T
    return np.stack([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h], axis=1)


def geodesic_matrix(t: float) -> np.ndarray:
    return np.array([math.exp(t / 2), 0.0, 0.0, math.exp(-t / 2)])


def horocycle_matrix(s: float) -> np.ndarray:
    return np.array([1.0, s, 0.0, 1.0])


def geodesic_flow(M, t: float) -> np.ndarray:
    """Right multiplication by ``diag(e^{t/2}, e^{-t/2})``."""
    return normalize(matmul(M, geodesic_matrix(t)))


def horocycle_flow(M, s: float) -> np.ndarray:
    """Right multiplication by ``[[1, s], [0, 1]]``."""
    return normalize(matmul(M, horocycle_matrix(s)))


def base_point(M):
    """``(Re z, Im z)`` of ``z = M . i``."""
    M = np.asarray(M, dtype=np.float64).reshape(-1, 4)
    a, b, c, d = M.T
    den = c * c + d * d
    return (a * c + b * d) / den, (a * d - b * c) / den


def direction(M) -> np.ndarray:
    """Unit-tangent angle in ``[0, 2 pi)``."""
    M = np.asarray(M, dtype=np.float64).reshape(-1, 4)
    return np.mod(np.pi / 2 - 2 * np.arctan2(M[:, 2], M[:, 3]), 2 * np.pi)


def from_upper_half_plane(x, y, theta=None) -> np.ndarray:
    """A matrix with base point ``x + i y`` (and direction ``theta``, default ``pi/2``)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    r = np.sqrt(y)
    M = np.stack([r, x / r, np.zeros_like(r), 1 / r], axis=1)
    if theta is not None:
        phi = (np.asarray(theta, dtype=np.float64) - np.pi / 2) / 2  # rotate about i
        c, s = np.cos(phi), np.sin(phi)
        K = np.stack([c, s, -s, c], axis=-1)
        M = matmul(M, K)
    return normalize(M)


@dataclass(frozen=True)
class DeckWord:
    """A word in ``S = [[0,-1],[1,0]]`` and ``T = [[1,1],[0,1]]`` as ``(letter, exponent)`` pairs.

    For ``reduced, w = reduce(p)`` one has ``matrix(w) . reduced = p``; the
    transformation applied by the reduction is ``w.applied()`` (the inverse word).
    """

    letters: tuple = ()

    def matrix(self) -> np.ndarray:
        out = np.array([1.0, 0.0, 0.0, 1.0])
        for g, e in self.letters:
            G = np.array([0.0, -1.0, 1.0, 0.0]) if g == "S" else np.array([1.0, float(e), 0.0, 1.0])
            if g == "S" and e % 2 == 0:
                continue
            out = matmul(out, G)[0]
        return out

    def inverse(self) -> "DeckWord":
        return DeckWord(tuple((g, -e if g == "T" else e) for g, e in reversed(self.letters)))

    def applied(self) -> "DeckWord":
        return self.inverse()

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return " ".join(g if e == 1 else f"{g}^{e}" for g, e in self.letters) or "e"


def reduce(M, max_steps: int = MAX_STEPS):
    """Reduce one matrix into the standard domain, recording the deck word."""
    a, b, c, d = normalize(M)[0]
    applied = []
    for _ in range(max_steps):
        den = c * c + d * d
        re = (a * c + b * d) / den
        if abs(re) > 0.5:
            n = math.floor(re + 0.5)
            a, b = a - n * c, b - n * d
            applied.append(("T", -int(n)))
        elif a * a + b * b < den * (1.0 - 1e-12):
            a, b, c, d = -c, -d, a, b
            applied.append(("S", 1))
        else:
            break
    else:
        raise InvariantError("reduction convergence", f"no convergence in {max_steps} steps")
    reduced = normalize([a, b, c, d])[0]
    # reduced = E_k ... E_1 M, so M = E_1^-1 ... E_k^-1 reduced
    w = DeckWord(tuple((g, -e if g == "T" else e) for g, e in applied))
    return reduced, w


def in_fundamental_domain(M, tol: float = 1e-9) -> np.ndarray:
    x, y = base_point(M)
    return (np.abs(x) <= 0.5 + tol) & (x * x + y * y >= 1 - tol)


# --- solenoid points -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FlowContext:
    """Fiber actions at every level of a tower based at a ``PSL(2,Z)`` realization."""

    tower: Tower | None
    actions: tuple  # FiberAction per level 0..L

    @property
    def depth(self) -> int:
        return len(self.actions) - 1

    @property
    def top(self) -> FiberAction:
        return self.actions[-1]

    def project(self, x, to_level: int):
        if self.tower is None:
            return np.asarray(x) * 0
        return project_address(self.tower, x, self.depth, to_level)

    def addresses(self, x) -> np.ndarray:
        """All levels' addresses for top-level indices ``x`` as columns."""
        x = np.atleast_1d(np.asarray(x, dtype=np.int64))
        return np.stack([self.project(x, n) for n in range(self.depth + 1)], axis=1)


def flow_context(tower: Tower | None, level: int | None = None) -> FlowContext:
    if tower is None:
        z = np.zeros(1, dtype=np.int64)
        return FlowContext(None, (FiberAction(0, 1, z, z, *cycle_tables(z)),))
    real = realization_for(tower.base)
    L = tower.depth if level is None else level
    return FlowContext(tower.truncate(L), tuple(fiber_action(real, tower, n) for n in range(L + 1)))


@dataclass(frozen=True, eq=False)
class SolenoidPoint:
    base: np.ndarray      # reduced (a, b, c, d)
    address: tuple        # X_n index per level

    def __post_init__(self):
        if not in_fundamental_domain(self.base)[0]:
            raise InvariantError("reduced base point", "base point outside the fundamental domain")


def make_point(ctx: FlowContext, M, x_top: int = 0) -> SolenoidPoint:
    R, addr, _ = reduce_batch(np.asarray(M, dtype=np.float64).reshape(1, 4), [x_top], ctx.top.tables)
    return SolenoidPoint(R[0], tuple(int(v) for v in ctx.addresses(addr)[0]))


def flow_solenoid(sp: SolenoidPoint, ctx: FlowContext, t: float = 0.0, s: float = 0.0) -> SolenoidPoint:
    """Apply the geodesic flow ``g_t`` then the horocycle flow ``h_s`` and re-reduce.

    The deck transformation applied by the reduction moves the fiber address.
    """
    M = sp.base
    if t:
        M = geodesic_flow(M, t)
    if s:
        M = horocycle_flow(M, s)
    R, addr, _ = reduce_batch(M, [sp.address[-1]], ctx.top.tables)
    out = SolenoidPoint(R[0], tuple(int(v) for v in ctx.addresses(addr)[0]))
    check_addresses(ctx, out.address)
    return out


def check_addresses(ctx: FlowContext, address) -> None:
    for n in range(ctx.depth):
        if ctx.tower is not None and int(project_address(ctx.tower, address[n + 1], n + 1, n)) != address[n]:
            raise InvariantError("address compatibility", f"levels {n} and {n + 1} disagree")


def closed_horocycle_matrices(y: float, N: int, width: int = 1, offset: float = 0.0) -> np.ndarray:
    """``N`` equally spaced points on the closed horocycle at height ``y``.

    The horocycle through ``i y`` has length ``width / y``; the ``k``-th point
    is ``h_s`` of the base point with ``s = (k + offset) width / (N y)``.
    """
    if y <= 0 or N < 1:
        raise ValidationError("need y > 0 and N >= 1")
    s = (np.arange(N, dtype=np.float64) + offset) * (width / (N * y))
    r = math.sqrt(y)
    M = np.empty((N, 4))
    M[:, 0] = r
    M[:, 1] = s * r
    M[:, 2] = 0.0
    M[:, 3] = 1 / r
    return M


def closed_horocycle_samples(y: float, N: int, ctx: FlowContext | None = None, offset: float = 0.0,
                             backend: str | None = None):
    """Reduced samples of the closed horocycle at height ``y`` through the basepoint.

    Returns ``(M, addresses)``; the horocycle in the cover closes after the
    T-cycle length of the basepoint address.
    """
    ctx = ctx or flow_context(None)
    width = ctx.top.closed_width(0)
    M = closed_horocycle_matrices(y, N, width, offset)
    R, addr, _ = reduce_batch(M, np.zeros(N, dtype=np.int64), ctx.top.tables, backend=backend)
    return R, ctx.addresses(addr)


def samples_csv(M, addresses) -> str:
    x, y = base_point(M)
    th = direction(M)
    cols = ["re", "im", "theta"] + [f"level{n}_addr" for n in range(addresses.shape[1])]
    lines = [",".join(cols)]
    for i in range(len(x)):
        lines.append(",".join([repr(float(x[i])), repr(float(y[i])), repr(float(th[i]))] +
                              [str(int(v)) for v in addresses[i]]))
    return "\n".join(lines) + "\n"
