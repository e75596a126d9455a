"""Finite covers of punctured surfaces as transitive permutation actions, and
towers (compatible chains) of such covers.

A cover of degree ``d`` over a base presentation is given by one permutation of
``{0, ..., d-1}`` per free generator; the cover's fundamental group is the
stabilizer of the basepoint.  A tower stores, for every level, the action of the
base group and the equivariant surjection onto the previous level.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np

from . import congruence as cg
from .errors import InvariantError, ValidationError
from .finite_groups import AffineGroup, CyclicGroup, PermutationGroup, group_from_descriptor
from .group_core import (
    FiniteAssignment,
    Presentation,
    Word,
    evaluate,
    presentation_from_json,
    presentation_to_json,
    reidemeister_schreier,
    schreier_tree,
    surface_group,
    word_perm,
)
from .linalg_mod import kernel_vector_mod, solve_mod
from .perm import as_perm, cycles, inverse, is_perm, is_transitive

SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class FiniteCover:
    """A transitive action of ``base`` on ``degree`` points."""

    base: Presentation
    perms: tuple
    basepoint: int = 0

    def __post_init__(self):
        perms = tuple(as_perm(p) for p in self.perms)
        object.__setattr__(self, "perms", perms)
        if len(perms) != self.base.free_rank:
            raise ValidationError(f"{len(perms)} permutations for a base of rank {self.base.free_rank}")
        d = len(perms[0]) if perms else 1
        for p in perms:
            if len(p) != d or not is_perm(p):
                raise ValidationError("generator images must be permutations of one common point set")
        if not 0 <= self.basepoint < d:
            raise ValidationError(f"basepoint {self.basepoint} outside 0..{d - 1}")
        if not is_transitive(perms, d):
            raise InvariantError("transitivity", f"action on {d} points is not transitive")

    @property
    def degree(self) -> int:
        return len(self.perms[0]) if self.perms else 1

    @property
    def assignment(self) -> FiniteAssignment:
        return FiniteAssignment(PermutationGroup(self.degree), tuple(tuple(int(v) for v in p) for p in self.perms))

    @cached_property
    def inv_perms(self):
        return tuple(inverse(p) for p in self.perms)

    def word_perm(self, w: Word) -> np.ndarray:
        return word_perm(w, self.perms, self.inv_perms)

    def peripheral_perm(self, j: int) -> np.ndarray:
        return self.word_perm(self.base.peripherals[j])

    @cached_property
    def subgroup(self):
        """Reidemeister-Schreier data of the basepoint stabilizer."""
        return reidemeister_schreier(self.base, self.perms, self.basepoint)


def identity_cover(p: Presentation) -> FiniteCover:
    return FiniteCover(p, tuple(np.zeros(1, dtype=np.int64) for _ in range(p.free_rank)))


def cusp_fibers(c: FiniteCover) -> list[list[tuple[int, int]]]:
    """For each base cusp, the cycles of its peripheral as ``(least point, width)``."""
    out = []
    for j in range(c.base.cusps):
        fib = [(cyc[0], len(cyc)) for cyc in cycles(c.peripheral_perm(j))]
        if sum(k for _, k in fib) != c.degree:
            raise InvariantError("cusp fiber partition", f"widths over cusp {j} do not sum to {c.degree}")
        out.append(fib)
    return out


def cusp_multiplicities(c: FiniteCover) -> list[int]:
    return [len(f) for f in cusp_fibers(c)]


def genus_of_cover(c: FiniteCover) -> int:
    """Riemann-Hurwitz: ``g' = (2 - d (2 - 2g - m) - c') / 2``."""
    total = sum(cusp_multiplicities(c))
    twice = 2 - c.degree * c.base.euler_characteristic - total
    if twice < 0 or twice % 2:
        raise InvariantError("Riemann-Hurwitz", f"2g' = {twice} for degree {c.degree} with {total} cusps")
    return twice // 2


def _centralizer_map(perms, tree, z: int):
    """The map commuting with the action that sends the basepoint to ``z``, or None."""
    d = len(perms[0])
    inv = [inverse(p) for p in perms]
    c = np.empty(d, dtype=np.int64)
    c[tree.basepoint] = z
    for y in tree.order[1:]:
        l = tree.letter[y]
        i = abs(l) - 1
        c[y] = (perms[i] if l > 0 else inv[i])[c[tree.parent[y]]]
    for p in perms:
        if not np.array_equal(p[c], c[p]):
            return None
    return c


def is_normal(c: FiniteCover) -> bool:
    """Whether the action is regular, i.e. the point stabilizer is normal.

    The stabilizer is normal iff every generator ``g`` normalizes it, iff there
    is a permutation commuting with the action that moves the basepoint to
    ``g . basepoint``.  Those are built along a spanning tree and checked on
    all edges, so no group elements are enumerated.
    """
    if c.degree == 1:
        return True
    tree = schreier_tree(c.perms, c.basepoint)
    for p in c.perms:
        if _centralizer_map(c.perms, tree, int(p[c.basepoint])) is None:
            return False
    return True


def abelianized_peripherals(p: Presentation) -> list[list[int]]:
    """Exponent-sum matrix: row ``j`` is the homology class of ``P_j``."""
    rows = []
    for w in p.peripherals:
        row = [0] * p.free_rank
        for i, s in w.pairs():
            row[i] += s
        rows.append(row)
    return rows


def solve_peripheral_homomorphism(p: Presentation, targets, mod: int):
    """An assignment into ``Z/mod`` with ``P_j -> targets[j]``, or None if none exists.

    Solved by linear algebra over ``Z/mod`` on the abelianization; the
    coordinates left free are set to 0.
    """
    if len(targets) != p.cusps:
        raise ValidationError(f"{len(targets)} targets for {p.cusps} cusps")
    sol = solve_mod(abelianized_peripherals(p), [int(t) % mod for t in targets], mod)
    if sol is None:
        return None
    return FiniteAssignment(CyclicGroup(mod), tuple(sol))


# --- towers ------------------------------------------------------------------

@dataclass(frozen=True)
class AssignmentRule:
    """Next level from an assignment of the top level's Reidemeister-Schreier basis."""

    assignment: FiniteAssignment
    label: str = ""


@dataclass(frozen=True)
class ExplicitRule:
    """Next level from an explicit action of the base group and a surjection."""

    perms: tuple
    surjection: tuple
    label: str = ""
    assignment: FiniteAssignment | None = None  # base-group images, if any


@dataclass(frozen=True, eq=False)
class Tower:
    base: Presentation
    levels: tuple
    surjections: tuple = ()  # surjections[n] maps points of level n+1 onto level n
    labels: tuple = ()
    rules: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not self.levels:
            raise ValidationError("a tower needs at least its base level")
        if len(self.surjections) != len(self.levels) - 1:
            raise ValidationError("need one surjection between consecutive levels")
        surj = tuple(as_perm(q) for q in self.surjections)
        object.__setattr__(self, "surjections", surj)
        for n, q in enumerate(surj):
            check_compatible(self.levels[n], self.levels[n + 1], q)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def top(self) -> FiniteCover:
        return self.levels[-1]

    def projection(self, n: int, m: int) -> np.ndarray:
        """Composite surjection from level ``n`` points to level ``m <= n``."""
        q = np.arange(self.levels[n].degree, dtype=np.int64)
        for k in range(n - 1, m - 1, -1):
            q = self.surjections[k][q]
        return q

    def truncate(self, depth: int) -> "Tower":
        if not 0 <= depth <= self.depth:
            raise ValidationError(f"depth {depth} outside 0..{self.depth}")
        return Tower(self.base, self.levels[:depth + 1], self.surjections[:depth],
                     self.labels[:depth + 1], self.rules[:depth + 1])


def check_compatible(lower: FiniteCover, upper: FiniteCover, q) -> None:
    q = as_perm(q)
    if len(q) != upper.degree:
        raise InvariantError("tower compatibility", "surjection has the wrong length")
    if q.min(initial=0) < 0 or q.max(initial=0) >= lower.degree or len(np.unique(q)) != lower.degree:
        raise InvariantError("tower compatibility", "point map is not onto the lower level")
    if int(q[upper.basepoint]) != lower.basepoint:
        raise InvariantError("basepoint compatibility", "q(basepoint) is not the lower basepoint")
    for i, (pu, pl) in enumerate(zip(upper.perms, lower.perms)):
        if not np.array_equal(q[pu], pl[q]):
            raise InvariantError("tower compatibility", f"q is not equivariant for generator {i}")


def identity_tower(p: Presentation, label: str = "base") -> Tower:
    return Tower(p, (identity_cover(p),), (), (label,), ({"kind": "identity"},))


def _assignment_level(t: Tower, a: FiniteAssignment):
    """Action on pairs ``(x, y)`` stored as ``x + d*y``: ``g(x, y) = (gx, phi(s(x,g)) y)``."""
    top = t.top
    sub = top.subgroup
    if len(a.images) != sub.presentation.free_rank:
        raise ValidationError(
            f"assignment has {len(a.images)} images, the top level has rank {sub.presentation.free_rank}")
    G = a.target
    fiber = [0]
    index = {0: 0}
    k = 0
    while k < len(fiber):
        y = fiber[k]
        k += 1
        for h in a.images:
            for z in (G.act(h, y), G.act(G.inv(h), y)):
                if z not in index:
                    index[z] = len(fiber)
                    fiber.append(z)
    e = len(fiber)
    d = top.degree
    ident = np.arange(e, dtype=np.int64)
    img_tables = [np.array([index[G.act(h, y)] for y in fiber], dtype=np.int64) for h in a.images]
    perms = []
    for i, p in enumerate(top.perms):
        new = np.empty(d * e, dtype=np.int64)
        for x in range(d):
            b = int(sub.edge_index[x, i])
            ytab = ident if b < 0 else img_tables[b]
            new[x + d * np.arange(e)] = int(p[x]) + d * ytab
        perms.append(new)
    surj = np.arange(d * e, dtype=np.int64) % d
    return perms, surj


def extend_tower(t: Tower, rule) -> Tower:
    if isinstance(rule, AssignmentRule):
        perms, surj = _assignment_level(t, rule.assignment)
        a = rule.assignment
        desc = {"kind": "assignment", "target": a.target.descriptor(),
                "images": [a.target.index(x) for x in a.images]}
    elif isinstance(rule, ExplicitRule):
        perms, surj = rule.perms, rule.surjection
        desc = {"kind": "explicit"}
        if rule.assignment is not None:
            a = rule.assignment
            desc.update(target=a.target.descriptor(), images=[a.target.index(x) for x in a.images])
    else:
        raise ValidationError(f"unknown tower rule {rule!r}")
    cover = FiniteCover(t.base, tuple(perms))
    return Tower(t.base, t.levels + (cover,), t.surjections + (as_perm(surj),),
                 t.labels + (rule.label,), t.rules + (desc,))


def cusp_counts(t: Tower, j: int = 0, depth: int | None = None) -> tuple[int, ...]:
    """``c_0, ..., c_L``: cusps of each level lying over base cusp ``j``."""
    L = t.depth if depth is None else depth
    if not 0 <= L <= t.depth:
        raise ValidationError(f"depth {L} exceeds the tower depth {t.depth}")
    if not 0 <= j < t.base.cusps:
        raise ValidationError(f"cusp {j} outside 0..{t.base.cusps - 1}")
    out = tuple(len(cycles(t.levels[n].peripheral_perm(j))) for n in range(L + 1))
    if any(a > b for a, b in zip(out, out[1:])):
        raise InvariantError("cusp count monotonicity", f"c = {out}")
    return out


@dataclass(frozen=True)
class TrichotomyReport:
    verdict: str  # "Class1", "Class2" or "Class3-so-far"
    counts: tuple
    m: int | None = None
    stabilization_level: int | None = None
    growth_levels: tuple = ()
    window: int = 1
    note: str = "verdict is based on the observed prefix c_0..c_L only"

    def __str__(self):
        c = "(" + ",".join(map(str, self.counts)) + ")"
        if self.verdict == "Class2":
            return f"Class2({self.m}), c={c}, stabilized at level {self.stabilization_level}"
        return f"{self.verdict}, c={c}"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "counts": list(self.counts), "m": self.m,
                "stabilization_level": self.stabilization_level,
                "growth_levels": list(self.growth_levels), "window": self.window, "note": self.note}


def classify_trichotomy(t: Tower, j: int = 0, depth: int | None = None, window: int = 1) -> TrichotomyReport:
    """Class1 / Class2(m) / Class3-so-far from the cusp counts ``c_0..c_L``.

    Class3-so-far iff ``c`` strictly increased within the last ``window``
    steps; otherwise the counts are stable at ``m = c_L``.
    """
    L = t.depth if depth is None else depth
    if L < 2:
        raise ValidationError(f"classification needs depth >= 2, got {L}")
    if window < 1:
        raise ValidationError("window must be >= 1")
    c = cusp_counts(t, j, L)
    growth = tuple(n for n in range(1, L + 1) if c[n] > c[n - 1])
    if all(v == 1 for v in c):
        return TrichotomyReport("Class1", c, 1, 0, growth, window)
    if any(n > L - window for n in growth):
        return TrichotomyReport("Class3-so-far", c, None, None, growth, window)
    m = c[-1]
    stab = min(n for n in range(L + 1) if c[n] == m)
    return TrichotomyReport("Class2", c, m, stab, growth, window)


def step_cover(t: Tower, n: int) -> FiniteCover:
    """Level ``n+1`` as a cover of level ``n``: the action of the level-``n``
    subgroup (in its Schreier basis) on the fiber over the basepoint."""
    if not 0 <= n < t.depth:
        raise ValidationError(f"no step above level {n} in a tower of depth {t.depth}")
    lower, upper = t.levels[n], t.levels[n + 1]
    sub = lower.subgroup
    fiber = np.flatnonzero(t.surjections[n] == lower.basepoint)
    pos = -np.ones(upper.degree, dtype=np.int64)
    pos[fiber] = np.arange(len(fiber))
    perms = []
    for w in sub.basis:
        p = upper.word_perm(w)[fiber]
        if (pos[p] < 0).any():
            raise InvariantError("tower compatibility", "a subgroup element leaves the basepoint fiber")
        perms.append(pos[p])
    return FiniteCover(sub.presentation, tuple(perms), int(pos[upper.basepoint]))


def is_mccord(t: Tower, depth: int | None = None) -> bool:
    """Whether every covering ``S_{n+1} -> S_n`` of the tower is regular.

    Regularity is tested step by step (the level-``n+1`` subgroup normal in the
    level-``n`` subgroup); ``is_composite_regular`` tests the levels as covers
    of the base instead.
    """
    L = t.depth if depth is None else depth
    return all(is_normal(step_cover(t, n)) for n in range(L))


def is_composite_regular(t: Tower, depth: int | None = None) -> bool:
    """Whether every level, as a cover of the base, is regular."""
    L = t.depth if depth is None else depth
    return all(is_normal(t.levels[n]) for n in range(L + 1))


# --- builders ----------------------------------------------------------------

def _all_peripherals(t: Tower, value: int, mod: int, label: str) -> Tower:
    sub = t.top.subgroup.presentation
    a = solve_peripheral_homomorphism(sub, [value] * sub.cusps, mod)
    if a is None:
        raise InvariantError("peripheral homomorphism", f"no map to Z/{mod} with all peripherals -> {value}")
    return extend_tower(t, AssignmentRule(a, label))


def build_class1m(m: int, depth: int, genus: int | None = None) -> Tower:
    """``m``-to-1 cyclic covers sending every peripheral to 1 in ``Z/m``.

    Each level keeps ``m`` cusps, each covering its predecessor ``m``-to-1.
    """
    if m < 2:
        raise ValidationError("m must be >= 2")
    if genus is None:
        genus = 0 if m >= 3 else 1
    t = identity_tower(surface_group(genus, m), f"S_{{{genus},{m}}}")
    for n in range(1, depth + 1):
        t = _all_peripherals(t, 1, m, f"cyclic Z/{m}, all peripherals -> 1 (level {n})")
    return t


def build_class1(depth: int) -> Tower:
    """2-to-1 covers of ``S_{1,2}`` that keep the number of cusps."""
    return build_class1m(2, depth, genus=1)


def build_class2(depth: int) -> Tower:
    """First level splits the cusp of ``S_{1,1}``; later levels keep the cusp count."""
    t = identity_tower(surface_group(1, 1), "S_{1,1}")
    if depth >= 1:
        t = extend_tower(t, AssignmentRule(FiniteAssignment(CyclicGroup(2), (1, 0)), "Z/2: a -> 1, b -> 0"))
    for n in range(2, depth + 1):
        t = _all_peripherals(t, 1, 2, f"Z/2, all peripherals -> 1 (level {n})")
    return t


def build_class3_closed(depth: int) -> Tower:
    """Every level: a handle generator -> 1, all peripherals -> 0 in ``Z/2``;
    each cusp splits in two and the genus stays 1."""
    t = identity_tower(surface_group(1, 1), "S_{1,1}")
    for n in range(1, depth + 1):
        sub = t.top.subgroup.presentation
        v = kernel_vector_mod(abelianized_peripherals(sub), 2)
        if v is None or not any(v):
            raise InvariantError("peripheral homomorphism", "no nonzero map to Z/2 killing the peripherals")
        t = extend_tower(t, AssignmentRule(FiniteAssignment(CyclicGroup(2), tuple(v)),
                                           f"Z/2, peripherals -> 0 (level {n})"))
    return t


def _s3_one_cusp_assignment(sub: Presentation, rng, max_tries: int = 200_000):
    S3 = PermutationGroup(3)
    elems = S3.elements()
    r = sub.free_rank
    if sub.cusps != 1:
        raise InvariantError("one cusp", f"level has {sub.cusps} cusps")
    w = sub.peripherals[0]
    candidates = product(elems, repeat=r) if r <= 2 else None
    for k in range(max_tries):
        if candidates is not None:
            imgs = next(candidates, None)
            if imgs is None:
                break
        else:
            imgs = tuple(elems[i] for i in rng.integers(0, 6, size=r))
        a = FiniteAssignment(S3, imgs)
        pw = evaluate(w, a)
        if sorted(pw) == [0, 1, 2] and all(pw[x] != x for x in range(3)):
            perms = [np.array(g) for g in imgs]
            if is_transitive(perms, 3):
                return a
    raise InvariantError("one-cusp search", "no degree-3 assignment with a 3-cycle peripheral found")


def build_nonregular_one_cusp(depth: int, seed: int = 0) -> Tower:
    """3-to-1 covers whose peripheral maps to a 3-cycle: one cusp at every level,
    genus ``(3^n + 1)/2``, never regular."""
    rng = np.random.default_rng(seed)
    t = identity_tower(surface_group(1, 1), "S_{1,1}")
    for n in range(1, depth + 1):
        a = _s3_one_cusp_assignment(t.top.subgroup.presentation, rng)
        t = extend_tower(t, AssignmentRule(a, f"S_3, peripheral -> 3-cycle (level {n})"))
    return t


# generators of Gamma(2) as a free group; their product inverse is parabolic
GAMMA2_GENERATORS = ((1, 2, 0, 1), (1, 0, -2, 1))


def gamma2_presentation() -> Presentation:
    return surface_group(0, 3)


def _congruence_points(N: int):
    """Image of ``Gamma(2)`` in ``PSL(2, Z/N)``, in BFS order from the identity."""
    gens = [cg.canonical(g, N) for g in GAMMA2_GENERATORS]
    gens_inv = [cg.canonical((d, -b, -c, a), N) for a, b, c, d in gens]
    start = cg.canonical((1, 0, 0, 1), N)
    pts = [start]
    index = {start: 0}
    k = 0
    while k < len(pts):
        M = pts[k]
        k += 1
        for g in gens + gens_inv:
            P = cg.mul_mod(g, M, N)
            if P not in index:
                index[P] = len(pts)
                pts.append(P)
    perms = [np.array([index[cg.mul_mod(g, M, N)] for M in pts], dtype=np.int64) for g in gens]
    return pts, index, perms


def congruence_moduli(kmax: int) -> list[int]:
    """``N_k = 2 * k!`` for ``k = 1..kmax``."""
    out, f = [], 1
    for k in range(1, kmax + 1):
        f *= k
        out.append(2 * f)
    return out


def build_congruence_tower(kmax: int = 4) -> Tower:
    """Levels ``Gamma(2 k!)`` over ``Gamma(2) = pi_1(S_{0,3})``, ``k = 1..kmax``."""
    if kmax < 1:
        raise ValidationError("kmax must be >= 1")
    p = gamma2_presentation()
    t = identity_tower(p, "Gamma(2)")
    moduli = congruence_moduli(kmax)
    prev = None
    for N in moduli[1:]:
        pts, index, perms = _congruence_points(N)
        Nprev = moduli[len(t.levels) - 1]
        if prev is None:
            prev_index = {cg.canonical((1, 0, 0, 1), Nprev): 0}
        else:
            prev_index = prev
        surj = np.array([prev_index[cg.canonical(M, Nprev)] for M in pts], dtype=np.int64)
        t = extend_tower(t, ExplicitRule(tuple(perms), surj, f"Gamma({N})"))
        prev = index
    return t


def padic_relation_holds(p: int, n: int, k: int) -> bool:
    """``[psi, tau] = tau^n`` in ``Aff(Z/p^k)`` for ``psi = x (n+1)``, ``tau = x + 1``."""
    G = AffineGroup(p, k)
    psi = G.validate(((n + 1) % G.n, 0))
    tau = G.validate((1 % G.n, 1 % G.n))
    comm = G.mul(G.mul(psi, tau), G.mul(G.inv(psi), G.inv(tau)))
    tau_n = G.identity
    for _ in range(n):
        tau_n = G.mul(tau_n, tau)
    return comm == tau_n


def build_padic_suspension(p: int, n_cusps: int, depth: int) -> Tower:
    """Affine action of ``pi_1(S_{1,n})`` on ``Z/p^k``.

    The first handle generator acts by ``psi: x -> (n+1) x``, the second and
    every ``c_j`` by ``tau: x -> x + 1``.  Since ``[psi, tau] = tau^n`` the last
    peripheral acts by ``tau`` as well, so each level has one cusp over every
    base cusp.  ``psi`` must be invertible, i.e. ``p`` must not divide ``n+1``.
    """
    if n_cusps < 1 or depth < 0:
        raise ValidationError("need n_cusps >= 1 and depth >= 0")
    if (n_cusps + 1) % p == 0:
        raise ValidationError(f"p={p} divides n+1={n_cusps + 1}: x -> {n_cusps + 1}x is not invertible mod {p}^k")
    base = surface_group(1, n_cusps)
    t = identity_tower(base, f"S_{{1,{n_cusps}}}")
    for k in range(1, depth + 1):
        if not padic_relation_holds(p, n_cusps, k):
            raise InvariantError("suspension relation", f"[psi, tau] != tau^{n_cusps} mod {p}^{k}")
        G = AffineGroup(p, k)
        psi = ((n_cusps + 1) % G.n, 0)
        tau = (1, 1 % G.n)
        imgs = (psi, tau) + (tau,) * (n_cusps - 1)
        perms = tuple(np.array([G.act(g, x) for x in range(G.n)], dtype=np.int64) for g in imgs)
        surj = np.arange(G.n, dtype=np.int64) % (p ** (k - 1))
        t = extend_tower(t, ExplicitRule(perms, surj, f"Aff(Z/{p}^{k})", FiniteAssignment(G, imgs)))
    return t


EXAMPLES = {
    "class1": lambda depth: build_class1(depth),
    "class2": lambda depth: build_class2(depth),
    "class3": lambda depth: build_class3_closed(depth),
    "nonregular": lambda depth: build_nonregular_one_cusp(depth),
    "congruence": lambda depth: build_congruence_tower(depth + 1),
    "triadic": lambda depth: build_padic_suspension(3, 1, depth),
}


def build_example(name: str, depth: int, **kw) -> Tower:
    if name.startswith("class1m"):
        m = int(name[len("class1m"):] or kw.get("m", 3))
        return build_class1m(m, depth)
    if name not in EXAMPLES:
        raise ValidationError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)} or class1m<m>")
    return EXAMPLES[name](depth)


# --- JSON ----------------------------------------------------------------------

def tower_to_json(t: Tower) -> dict:
    levels = []
    for n, lev in enumerate(t.levels):
        levels.append({
            "label": t.labels[n] if n < len(t.labels) else "",
            "degree": lev.degree,
            "rule": t.rules[n] if n < len(t.rules) else {"kind": "explicit"},
            "action": [p.tolist() for p in lev.perms],
            "surjection": t.surjections[n - 1].tolist() if n else None,
        })
    return {"schema_version": SCHEMA_VERSION, "kind": "tower",
            "base": presentation_to_json(t.base), "levels": levels}


def tower_from_json(data: dict) -> Tower:
    """Rebuild a tower and re-verify it; assignment levels are re-derived and
    must reproduce the stored action exactly."""
    if data.get("kind") != "tower":
        raise ValidationError("not a tower document")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"unsupported schema_version {data.get('schema_version')!r}")
    base = presentation_from_json(data["base"])
    levels = data["levels"]
    if not levels:
        raise ValidationError("tower document has no levels")
    t = Tower(base, (FiniteCover(base, tuple(np.array(a, dtype=np.int64) for a in levels[0]["action"])),),
              (), (levels[0].get("label", ""),), (levels[0].get("rule", {"kind": "identity"}),))
    for lev in levels[1:]:
        rule = lev.get("rule", {"kind": "explicit"})
        perms = tuple(np.array(a, dtype=np.int64) for a in lev["action"])
        if rule.get("kind") == "assignment":
            G = group_from_descriptor(rule["target"])
            a = FiniteAssignment(G, tuple(G.element(int(i)) for i in rule["images"]))
            t2 = extend_tower(t, AssignmentRule(a, lev.get("label", "")))
            if any(not np.array_equal(x, y) for x, y in zip(t2.top.perms, perms)) or \
                    not np.array_equal(t2.surjections[-1], np.array(lev["surjection"])):
                raise InvariantError("tower fixture consistency", f"level {len(t.levels)} does not match its assignment")
            t = t2
        else:
            t = extend_tower(t, ExplicitRule(perms, np.array(lev["surjection"], dtype=np.int64), lev.get("label", "")))
            object.__setattr__(t, "rules", t.rules[:-1] + (rule,))
    return t


def save_tower(t: Tower, path) -> None:
    with open(path, "w") as fh:
        json.dump(tower_to_json(t), fh, separators=(",", ":"), sort_keys=True)
        fh.write("\n")


def load_tower(path) -> Tower:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read tower file {path}: {exc}") from None
    return tower_from_json(data)
