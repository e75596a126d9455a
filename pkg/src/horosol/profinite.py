"""Odometers over cusps, truncated inverse-limit addresses, minimal-set
decomposition and the forest of cuspidal ends.

An odometer is a chain of finite sets ``F_0 <- F_1 <- ...`` with permutations
``T_n`` commuting with the surjections ``q_n``.  Addresses are always finite
truncations ``(f_0, ..., f_L)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import lcm

import numpy as np

from .covering import Tower, cusp_counts, is_mccord
from .errors import InvariantError, ValidationError
from .perm import as_perm, cycle_type, cycles, is_perm


@dataclass(frozen=True, eq=False)
class OdometerSystem:
    """Levels ``(F_n, T_n)`` with ``q[n]: F_{n+1} -> F_n``; ``F_n = range(len(T[n]))``."""

    T: tuple
    q: tuple

    def __post_init__(self):
        T = tuple(as_perm(p) for p in self.T)
        q = tuple(as_perm(x) for x in self.q)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "q", q)
        if not T:
            raise ValidationError("an odometer needs at least one level")
        if len(q) != len(T) - 1:
            raise ValidationError("need one surjection between consecutive levels")
        for n, p in enumerate(T):
            if not is_perm(p):
                raise ValidationError(f"T_{n} is not a permutation")
        for n, qn in enumerate(q):
            if len(qn) != len(T[n + 1]) or len(np.unique(qn)) != len(T[n]) or qn.min() < 0 or qn.max() >= len(T[n]):
                raise InvariantError("odometer surjectivity", f"q_{n} is not onto F_{n}")
            if not np.array_equal(T[n][qn], qn[T[n + 1]]):
                raise InvariantError("odometer equivariance", f"T_{n} q_{n} != q_{n} T_{n + 1}")

    @property
    def depth(self) -> int:
        return len(self.T) - 1

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.T)

    def cycle_types(self) -> list[list[int]]:
        """Per level, the cycle type of ``T_n`` as a sorted partition."""
        return [list(cycle_type(p)) for p in self.T]

    def truncate(self, depth: int) -> "OdometerSystem":
        if not 0 <= depth <= self.depth:
            raise ValidationError(f"depth {depth} outside 0..{self.depth}")
        return OdometerSystem(self.T[:depth + 1], self.q[:depth])


def odometer_from_cusp(t: Tower, j: int = 0, depth: int | None = None) -> OdometerSystem:
    """``F_n`` = level-``n`` points, ``T_n`` = action of the peripheral ``P_j``."""
    L = t.depth if depth is None else depth
    if not 0 <= L <= t.depth:
        raise ValidationError(f"depth {L} exceeds the tower depth {t.depth}")
    if not 0 <= j < t.base.cusps:
        raise ValidationError(f"cusp {j} outside 0..{t.base.cusps - 1}")
    T = tuple(t.levels[n].peripheral_perm(j) for n in range(L + 1))
    return OdometerSystem(T, t.surjections[:L])


def cyclic_odometer(moduli) -> OdometerSystem:
    """``F_n = Z/(M_1 ... M_n)`` (``F_0`` a point) with ``T_n = +1``; dyadic for moduli 2, 2, ..."""
    sizes = [1]
    for m in moduli:
        if m < 1:
            raise ValidationError("moduli must be positive")
        sizes.append(sizes[-1] * m)
    T = tuple((np.arange(s, dtype=np.int64) + 1) % s for s in sizes)
    q = tuple(np.arange(sizes[n + 1], dtype=np.int64) % sizes[n] for n in range(len(sizes) - 1))
    return OdometerSystem(T, q)


def validate_address(o: OdometerSystem, a) -> tuple[int, ...]:
    a = tuple(int(x) for x in a)
    if not a or len(a) > len(o.T):
        raise ValidationError(f"address length {len(a)} outside 1..{len(o.T)}")
    for n, x in enumerate(a):
        if not 0 <= x < len(o.T[n]):
            raise ValidationError(f"coordinate {n} = {x} outside F_{n}")
    for n in range(len(a) - 1):
        if int(o.q[n][a[n + 1]]) != a[n]:
            raise ValidationError(f"address is incompatible at level {n}: q({a[n + 1]}) != {a[n]}")
    return a


def address_of(o: OdometerSystem, x: int, level: int) -> tuple[int, ...]:
    """The address ``(q...(x), ..., x)`` determined by a point of ``F_level``."""
    coords = [int(x)]
    for n in range(level - 1, -1, -1):
        coords.append(int(o.q[n][coords[-1]]))
    return tuple(reversed(coords))


def truncate(a, n: int) -> tuple[int, ...]:
    return tuple(a[:n + 1])


def step(o: OdometerSystem, a, k: int = 1) -> tuple[int, ...]:
    """Apply ``T`` (or ``T^k``) coordinate-wise."""
    a = validate_address(o, a)
    out = list(a)
    for n in range(len(a)):
        p = o.T[n] if k >= 0 else np.argsort(o.T[n])
        for _ in range(abs(k)):
            out[n] = int(p[out[n]])
    return tuple(out)


def orbit_length(o: OdometerSystem, a) -> int:
    """Period of an address under ``T``, by brute-force iteration."""
    a = validate_address(o, a)
    b = step(o, a)
    k = 1
    while b != a:
        b = step(o, b)
        k += 1
    return k


def containing_cycle_lcm(o: OdometerSystem, a) -> int:
    a = validate_address(o, a)
    out = 1
    for n, x in enumerate(a):
        for cyc in cycles(o.T[n]):
            if x in cyc:
                out = lcm(out, len(cyc))
                break
    return out


def is_minimal(o: OdometerSystem) -> bool:
    """Whether every ``T_n`` is a single cycle on ``F_n``."""
    return all(len(cycles(p)) == 1 for p in o.T)


@dataclass(frozen=True)
class Component:
    """One minimal component: the ``T_n``-cycle it occupies at each level."""

    cycles: tuple  # cycles[n] = tuple of points of F_n (starting at the least one)

    @property
    def cycle_lengths(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.cycles)

    def odometer(self, o: OdometerSystem) -> OdometerSystem:
        """The component as an odometer in its own right (points relabeled)."""
        T, q = [], []
        pos_prev = None
        for n, cyc in enumerate(self.cycles):
            pos = {x: i for i, x in enumerate(cyc)}
            T.append(np.array([pos[int(o.T[n][x])] for x in cyc], dtype=np.int64))
            if n:
                q.append(np.array([pos_prev[int(o.q[n - 1][x])] for x in cyc], dtype=np.int64))
            pos_prev = pos
        return OdometerSystem(tuple(T), tuple(q))


def minimal_decomposition(o: OdometerSystem, depth: int | None = None) -> list[Component]:
    """Components at depth ``L``: one per cycle of ``T_L``, traced down the levels.

    Ordered by least point at level ``L``.  The refinement property (each
    level-``n+1`` cycle maps onto exactly one level-``n`` cycle) is verified.
    """
    L = o.depth if depth is None else depth
    if not 0 <= L <= o.depth:
        raise ValidationError(f"depth {L} outside 0..{o.depth}")
    level_cycles = [cycles(o.T[n]) for n in range(L + 1)]
    owner = []
    for n in range(L + 1):
        own = np.empty(len(o.T[n]), dtype=np.int64)
        for k, cyc in enumerate(level_cycles[n]):
            own[list(cyc)] = k
        owner.append(own)
    for n in range(L):
        for cyc in level_cycles[n + 1]:
            below = {int(owner[n][o.q[n][x]]) for x in cyc}
            if len(below) != 1:
                raise InvariantError("cycle refinement", f"a level-{n + 1} cycle meets {len(below)} level-{n} cycles")
    comps = []
    for cyc in level_cycles[L]:
        chain = [cyc]
        x = cyc[0]
        for n in range(L - 1, -1, -1):
            x = int(o.q[n][x])
            chain.append(level_cycles[n][int(owner[n][x])])
        comps.append(Component(tuple(reversed(chain))))
    return comps


def component_multiplicities(o: OdometerSystem, depth: int | None = None) -> list[int]:
    """Number of distinct component cycles at each level ``0..L``."""
    comps = minimal_decomposition(o, depth)
    return [len({c.cycles[n] for c in comps}) for n in range(len(comps[0].cycles))]


# --- end forest ----------------------------------------------------------------

@dataclass(frozen=True)
class EndForest:
    """Per base cusp, a rooted tree whose depth-``n`` vertices are the level-``n``
    cusps over it; a vertex is ``(n, least point of its cycle)``."""

    vertices: tuple  # vertices[j][n] = tuple of least points
    parents: tuple   # parents[j][n] = tuple of parent least points (n >= 1)
    mccord: bool = False

    @property
    def depth(self) -> int:
        return len(self.vertices[0]) - 1

    def counts(self, j: int = 0) -> tuple[int, ...]:
        return tuple(len(v) for v in self.vertices[j])

    def out_degrees(self, j: int, n: int) -> list[int]:
        """Children counts of the depth-``n`` vertices of tree ``j``."""
        kids = {v: 0 for v in self.vertices[j][n]}
        for p in self.parents[j][n + 1]:
            kids[p] += 1
        return [kids[v] for v in self.vertices[j][n]]

    def to_json(self) -> dict:
        trees = []
        for j in range(len(self.vertices)):
            nodes = [f"{j}:{n}:{v}" for n, vs in enumerate(self.vertices[j]) for v in vs]
            edges = [[f"{j}:{n - 1}:{p}", f"{j}:{n}:{v}"]
                     for n in range(1, len(self.vertices[j]))
                     for v, p in zip(self.vertices[j][n], self.parents[j][n])]
            trees.append({"cusp": j, "counts": list(self.counts(j)), "nodes": nodes, "edges": edges})
        return {"schema_version": 1, "kind": "end_forest", "mccord": self.mccord, "trees": trees}

    def to_dot(self) -> str:
        lines = ["digraph ends {"]
        for tree in self.to_json()["trees"]:
            for node in tree["nodes"]:
                lines.append(f'  "{node}";')
            for a, b in tree["edges"]:
                lines.append(f'  "{a}" -> "{b}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def end_forest(t: Tower, depth: int | None = None) -> EndForest:
    L = t.depth if depth is None else depth
    verts, pars = [], []
    for j in range(t.base.cusps):
        o = odometer_from_cusp(t, j, L)
        vj, pj = [], [()]
        owners = []
        for n in range(L + 1):
            cyc = cycles(o.T[n])
            own = np.empty(len(o.T[n]), dtype=np.int64)
            for c in cyc:
                own[list(c)] = c[0]
            owners.append(own)
            vj.append(tuple(c[0] for c in cyc))
            if n:
                pj.append(tuple(int(owners[n - 1][o.q[n - 1][c[0]]]) for c in cyc))
        verts.append(tuple(vj))
        pars.append(tuple(pj))
        if tuple(len(v) for v in vj) != cusp_counts(t, j, L):
            raise InvariantError("end forest counts", f"vertex counts differ from c_n over cusp {j}")
    return EndForest(tuple(verts), tuple(pars), is_mccord(t, L))


@dataclass(frozen=True)
class EndSpaceReport:
    verdict: str  # "finite" or "Cantor-so-far"
    k: int | None
    window: int
    counts: tuple
    note: str = "based on the inspected window of levels only"

    def __str__(self):
        return f"finite({self.k})" if self.verdict == "finite" else f"Cantor-so-far (window {self.window})"


def classify_end_space(f: EndForest, window: int = 1, j: int = 0) -> EndSpaceReport:
    """``finite(k)`` if tree ``j`` does not branch in the last ``window`` levels,
    otherwise ``Cantor-so-far``.  For McCord towers out-degrees must be uniform
    at every depth."""
    if window < 1 or window > f.depth:
        raise ValidationError(f"window must lie in 1..{f.depth}")
    if f.mccord:
        for n in range(f.depth):
            if len(set(f.out_degrees(j, n))) > 1:
                raise InvariantError("uniform branching", f"unequal out-degrees at depth {n} of a McCord tower")
    c = f.counts(j)
    if c[-1] > c[-1 - window]:
        return EndSpaceReport("Cantor-so-far", None, window, c)
    return EndSpaceReport("finite", c[-1], window, c)


def dumps_forest(f: EndForest, fmt: str = "json") -> str:
    if fmt == "dot":
        return f.to_dot()
    return json.dumps(f.to_json(), sort_keys=True, indent=1) + "\n"
