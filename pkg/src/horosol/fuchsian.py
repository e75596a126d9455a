"""Surface groups realized as finite-index subgroups of ``PSL(2, Z)``.

Two torsion-free realizations are provided, each normal of index 6:

* ``Gamma(2)``, free on ``[[1,2],[0,1]]`` and ``[[1,0],[-2,1]]``, for ``S_{0,3}``;
* the commutator subgroup ``Gamma'``, free on ``A = [[2,-1],[-1,1]]`` and
  ``B = [[2,1],[1,1]]`` with ``[A, B] = T^-6``, for ``S_{1,1}``.

A cover of the surface (one level of a tower, acting on ``F``) induces an
action of ``PSL(2, Z)`` on ``X = cosets x F``; a point ``(c, y)`` is stored as
``6*y + c``.  Reduction into the ``PSL(2,Z)`` fundamental domain moves the
fiber address through that action.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .congruence import canonical
from .covering import GAMMA2_GENERATORS, Tower
from .errors import InvariantError, ValidationError
from .group_core import Presentation, Word, surface_group, word_perm
from .perm import cycles, inverse

S_MAT = (0, -1, 1, 0)
T_MAT = (1, 1, 0, 1)
INDEX = 6


def imul(M, N):
    a, b, c, d = M
    e, f, g, h = N
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def iinv(M):
    a, b, c, d = M
    return (d, -b, -c, a)


def ipow(M, k: int):
    out = (1, 0, 0, 1)
    base = M if k >= 0 else iinv(M)
    for _ in range(abs(k)):
        out = imul(out, base)
    return out


def psl_key(M):
    """Sign-normalized integer matrix (first nonzero entry positive)."""
    for v in M:
        if v:
            return tuple(M) if v > 0 else tuple(-x for x in M)
    raise ValidationError("zero matrix")


def st_word(M) -> list[tuple[str, int]]:
    """Letters ``(g, e)`` with ``M = +- prod g^e`` (left to right), ``g`` in ``{"S", "T"}``.

    Exact integer Euclid on the bottom row.
    """
    a, b, c, d = (int(v) for v in M)
    if a * d - b * c != 1:
        raise ValidationError(f"{M} is not in SL(2,Z)")
    applied = []  # letters E applied on the left, in order
    while c != 0:
        n = a // c
        if n:
            a, b = a - n * c, b - n * d
            applied.append(("T", -n))
        a, b, c, d = -c, -d, a, b
        applied.append(("S", 1))
    # now M' = E M = +-[[1, k], [0, 1]]
    k = b * a  # a = +-1, so b/a = b*a
    # M = E^-1 T^k = L_1^-1 L_2^-1 ... T^k, and S^-1 = S in PSL
    word = [(g, 1 if g == "S" else -e) for g, e in applied]
    if k:
        word.append(("T", k))
    return [(g, e) for g, e in word if e]


def word_matrix(word) -> tuple:
    out = (1, 0, 0, 1)
    for g, e in word:
        out = imul(out, ipow(S_MAT if g == "S" else T_MAT, e))
    return out


def abelian_character(M) -> int:
    """The map ``PSL(2,Z) -> Z/6`` with ``S -> 3``, ``T -> 5``; its kernel is ``Gamma'``."""
    return sum((3 if g == "S" else 5) * e for g, e in st_word(M)) % 6


@dataclass(frozen=True, eq=False)
class Realization:
    name: str
    presentation: Presentation
    generators: tuple  # integer matrices of the free generators
    reps: tuple        # coset representatives r_c, r_0 = identity
    sigma: dict        # (c, "S"|"T") -> (c', Word in the free generators)

    def coset(self, M) -> int:
        key = self._key(M)
        return self._coset_of[key]

    def _key(self, M):
        if self.name == "gamma2":
            return canonical(M, 2)
        return abelian_character(M)

    @property
    def _coset_of(self):
        return {self._key(r): c for c, r in enumerate(self.reps)}


def _word_dictionary(gens, max_len: int):
    """Sign-normalized matrix -> shortest reduced word in ``gens``."""
    letters = [(i + 1, g) for i, g in enumerate(gens)] + [(-(i + 1), iinv(g)) for i, g in enumerate(gens)]
    table = {psl_key((1, 0, 0, 1)): Word()}
    frontier = [((), (1, 0, 0, 1))]
    for _ in range(max_len):
        nxt = []
        for w, M in frontier:
            for l, G in letters:
                if w and w[-1] == -l:
                    continue
                N = imul(M, G)
                key = psl_key(N)
                if key not in table:
                    table[key] = Word(w + (l,))
                    nxt.append((w + (l,), N))
        frontier = nxt
    return table


def _build(name: str, presentation: Presentation, gens, key) -> Realization:
    # coset representatives by BFS over S, T, T^-1
    reps, keys = [(1, 0, 0, 1)], [key((1, 0, 0, 1))]
    queue = deque([(1, 0, 0, 1)])
    while queue:
        M = queue.popleft()
        for G in (S_MAT, T_MAT, iinv(T_MAT)):
            N = imul(G, M)
            k = key(N)
            if k not in keys:
                keys.append(k)
                reps.append(N)
                queue.append(N)
    if len(reps) != INDEX:
        raise InvariantError("coset count", f"{name}: {len(reps)} cosets, expected {INDEX}")
    for G in gens:
        if key(G) != keys[0]:
            raise InvariantError("generator membership", f"{name}: {G} is not in the subgroup")
    table = _word_dictionary(gens, 8)
    sigma = {}
    for c, r in enumerate(reps):
        for g, G in (("S", S_MAT), ("T", T_MAT)):
            N = imul(G, r)
            c2 = keys.index(key(N))
            s = imul(iinv(reps[c2]), N)
            w = table.get(psl_key(s))
            if w is None:
                raise InvariantError("coset decomposition", f"{name}: no short word for {s}")
            sigma[(c, g)] = (c2, w)
    return Realization(name, presentation, tuple(gens), tuple(reps), sigma)


@lru_cache(maxsize=None)
def gamma2() -> Realization:
    return _build("gamma2", surface_group(0, 3), GAMMA2_GENERATORS, lambda M: canonical(M, 2))


GAMMA_PRIME_GENERATORS = ((2, -1, -1, 1), (2, 1, 1, 1))


@lru_cache(maxsize=None)
def gamma_prime() -> Realization:
    return _build("commutator", surface_group(1, 1), GAMMA_PRIME_GENERATORS, abelian_character)


def realization_for(p: Presentation) -> Realization:
    for r in (gamma2(), gamma_prime()):
        if r.presentation == p:
            return r
    raise ValidationError(
        f"no PSL(2,Z) realization for a base of genus {p.genus} with {p.cusps} cusps "
        "(supported: S_{0,3} as Gamma(2), S_{1,1} as the commutator subgroup)")


@dataclass(frozen=True, eq=False)
class FiberAction:
    """Action of ``S`` and ``T`` on ``X_L`` (size ``6 * d_L``) with T-cycle tables."""

    level: int
    size: int
    s_perm: np.ndarray
    t_perm: np.ndarray
    t_start: np.ndarray
    t_len: np.ndarray
    t_pos: np.ndarray
    t_members: np.ndarray

    @property
    def tables(self):
        return (self.s_perm, self.t_start, self.t_len, self.t_pos, self.t_members)

    def t_power(self, x, k):
        x = np.asarray(x, dtype=np.int64)
        return self.t_members[self.t_start[x] + np.mod(self.t_pos[x] + k, self.t_len[x])]

    def closed_width(self, x: int = 0) -> int:
        """Length of the T-cycle through ``x``: the period of the closed horocycle."""
        return int(self.t_len[x])


def cycle_tables(p: np.ndarray):
    n = len(p)
    start = np.empty(n, dtype=np.int64)
    length = np.empty(n, dtype=np.int64)
    pos = np.empty(n, dtype=np.int64)
    members = np.empty(n, dtype=np.int64)
    k = 0
    for cyc in cycles(p):
        L = len(cyc)
        idx = np.array(cyc, dtype=np.int64)
        start[idx] = k
        length[idx] = L
        pos[idx] = np.arange(L)
        members[k:k + L] = idx
        k += L
    return start, length, pos, members


def fiber_action(real: Realization, tower: Tower | None, level: int = 0) -> FiberAction:
    if tower is None:
        perms = tuple(np.zeros(1, dtype=np.int64) for _ in real.generators)
    else:
        if tower.base != real.presentation:
            raise ValidationError("tower base does not match the realization")
        if not 0 <= level <= tower.depth:
            raise ValidationError(f"level {level} outside 0..{tower.depth}")
        perms = tower.levels[level].perms
    inv = [inverse(p) for p in perms]
    d = len(perms[0])
    out = {}
    ys = np.arange(d, dtype=np.int64)
    for g in ("S", "T"):
        table = np.empty(INDEX * d, dtype=np.int64)
        for c in range(INDEX):
            c2, w = real.sigma[(c, g)]
            table[INDEX * ys + c] = INDEX * word_perm(w, perms, inv) + c2
        out[g] = table
    start, length, pos, members = cycle_tables(out["T"])
    return FiberAction(level, INDEX * d, out["S"], out["T"], start, length, pos, members)


def project_address(tower: Tower, x, level: int, to_level: int):
    """Project ``X_level`` indices to ``X_to_level``."""
    x = np.asarray(x, dtype=np.int64)
    y = tower.projection(level, to_level)[x // INDEX]
    return INDEX * y + x % INDEX


def check_realization(real: Realization) -> None:
    """Generators are free-group images of the presentation with parabolic peripherals."""
    for w in real.presentation.peripherals:
        M = (1, 0, 0, 1)
        for l in w.letters:
            G = real.generators[abs(l) - 1]
            M = imul(M, G if l > 0 else iinv(G))
        if abs(M[0] + M[3]) != 2:
            raise InvariantError("parabolic peripheral", f"{real.name}: peripheral {w} has trace {M[0] + M[3]}")
    for (c, g), (c2, w) in real.sigma.items():
        M = (1, 0, 0, 1)
        for l in w.letters:
            G = real.generators[abs(l) - 1]
            M = imul(M, G if l > 0 else iinv(G))
        lhs = psl_key(imul(real.reps[c2], M))
        rhs = psl_key(imul(S_MAT if g == "S" else T_MAT, real.reps[c]))
        if lhs != rhs:
            raise InvariantError("coset decomposition", f"{real.name}: g r_c != r_c' sigma at c={c}, g={g}")
