"""Free-group words, punctured-surface presentations and Reidemeister-Schreier.

Words are stored as tuples of nonzero signed integers: generator ``i`` is the
letter ``i + 1`` and its inverse is ``-(i + 1)``.  This is also the JSON
encoding.  Group elements act on the left, so a word ``l1 l2 ... lk`` acting on
a point applies ``lk`` first.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvariantError, ValidationError
from .perm import as_perm, cycles, inverse


def _free_reduce(letters) -> tuple[int, ...]:
    out: list[int] = []
    for l in letters:
        l = int(l)
        if l == 0:
            raise ValidationError("0 is not a valid letter (generators are encoded as +-(index+1))")
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


@dataclass(frozen=True, init=False)
class Word:
    """A freely reduced word in a free group."""

    letters: tuple[int, ...]

    def __init__(self, letters: Sequence[int] = ()):
        object.__setattr__(self, "letters", _free_reduce(letters))

    @classmethod
    def gen(cls, i: int, sign: int = 1) -> "Word":
        return cls(((i + 1) * (1 if sign > 0 else -1),))

    def pairs(self) -> list[tuple[int, int]]:
        """The word as ``(generator index, +-1)`` pairs."""
        return [(abs(l) - 1, 1 if l > 0 else -1) for l in self.letters]

    def inverse(self) -> "Word":
        return Word(tuple(-l for l in reversed(self.letters)))

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else self.inverse()
        return Word(base.letters * abs(k))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def max_generator(self) -> int:
        return max((abs(l) - 1 for l in self.letters), default=-1)

    def __repr__(self) -> str:
        return f"Word({list(self.letters)})"


IDENTITY = Word()


def word_reduce(w) -> Word:
    """Freely reduce a word given as a ``Word`` or a sequence of signed letters."""
    return Word(w.letters if isinstance(w, Word) else w)


def commutator(u: Word, v: Word) -> Word:
    """``[u, v] = u v u^-1 v^-1``."""
    return u * v * u.inverse() * v.inverse()


@dataclass(frozen=True)
class Presentation:
    """A free group of rank ``2g + m - 1`` with ``m`` peripheral (cusp) words."""

    genus: int
    cusps: int
    generators: tuple[str, ...]
    peripherals: tuple[Word, ...]

    def __post_init__(self):
        if self.cusps < 1:
            raise ValidationError("a punctured surface needs at least one cusp (compact bases are not supported)")
        if self.genus < 0:
            raise ValidationError(f"negative genus {self.genus}")
        if len(self.generators) != 2 * self.genus + self.cusps - 1:
            raise ValidationError(
                f"free rank {len(self.generators)} != 2g+m-1 = {2 * self.genus + self.cusps - 1}")
        if len(self.peripherals) != self.cusps:
            raise ValidationError(f"expected {self.cusps} peripheral words, got {len(self.peripherals)}")
        for w in self.peripherals:
            if w.max_generator() >= self.free_rank:
                raise ValidationError(f"peripheral {w} uses an unknown generator")

    @property
    def free_rank(self) -> int:
        return len(self.generators)

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus - self.cusps


def surface_group(g: int, m: int) -> Presentation:
    """Standard presentation of the fundamental group of ``S_{g,m}``.

    Generators ``a1, b1, ..., ag, bg, c1, ..., c_{m-1}``.  The peripherals are
    ``P_j = c_j`` for ``j < m`` and ``P_m = (c_1 ... c_{m-1})^-1 (prod [a_i, b_i])``,
    so that ``prod [a_i, b_i] = P_1 ... P_m``.
    """
    if m < 1:
        raise ValidationError("m = 0 (compact surface) is not supported")
    if g < 0:
        raise ValidationError(f"negative genus {g}")
    names = []
    for i in range(1, g + 1):
        names += [f"a{i}", f"b{i}"]
    names += [f"c{j}" for j in range(1, m)]
    handles = IDENTITY
    for i in range(g):
        handles = handles * commutator(Word.gen(2 * i), Word.gen(2 * i + 1))
    cs = [Word.gen(2 * g + j) for j in range(m - 1)]
    prod_c = IDENTITY
    for c in cs:
        prod_c = prod_c * c
    last = prod_c.inverse() * handles
    return Presentation(g, m, tuple(names), tuple(cs) + (last,))


def check_surface_relation(p: Presentation) -> bool:
    """True iff ``P_1 ... P_m`` equals the product of the handle commutators
    on the first ``2g`` generators."""
    prod = IDENTITY
    for w in p.peripherals:
        prod = prod * w
    handles = IDENTITY
    for i in range(p.genus):
        handles = handles * commutator(Word.gen(2 * i), Word.gen(2 * i + 1))
    return prod == handles


@dataclass(frozen=True)
class FiniteAssignment:
    """Images of the free generators in a finite target group."""

    target: object
    images: tuple

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.target.validate(x) for x in self.images))


def evaluate(w: Word, a: FiniteAssignment):
    """Image of ``w`` under the homomorphism defined by ``a``."""
    t = a.target
    out = t.identity
    for l in w.letters:
        i = abs(l) - 1
        if i >= len(a.images):
            raise ValidationError(f"generator index {i} has no image (assignment has {len(a.images)})")
        x = a.images[i]
        out = t.mul(out, x if l > 0 else t.inv(x))
    return out


# --- permutation actions -------------------------------------------------

def word_perm(w: Word, perms, inv_perms=None) -> np.ndarray:
    """Permutation by which ``w`` acts, given one permutation per generator."""
    perms = [as_perm(p) for p in perms]
    if inv_perms is None:
        inv_perms = [inverse(p) for p in perms]
    d = len(perms[0]) if perms else 1
    pts = np.arange(d, dtype=np.int64)
    for l in reversed(w.letters):
        i = abs(l) - 1
        if i >= len(perms):
            raise ValidationError(f"generator index {i} has no permutation")
        pts = (perms[i] if l > 0 else inv_perms[i])[pts]
    return pts


def act_point(w: Word, perms, x: int, inv_perms=None) -> int:
    if inv_perms is None:
        inv_perms = [inverse(p) for p in perms]
    for l in reversed(w.letters):
        i = abs(l) - 1
        x = int((perms[i] if l > 0 else inv_perms[i])[x])
    return x


def subgroup_membership(w: Word, action, basepoint: int = 0) -> bool:
    """Whether ``w`` lies in the stabilizer of ``basepoint``."""
    return act_point(w, action, basepoint) == basepoint


@dataclass(frozen=True)
class SchreierTree:
    """BFS spanning tree of a transitive action.

    ``parent[x]`` and ``letter[x]`` satisfy ``x = letter[x] . parent[x]``;
    ``order`` lists points in discovery order.
    """

    basepoint: int
    order: tuple[int, ...]
    parent: tuple[int, ...]
    letter: tuple[int, ...]
    reps: tuple[Word, ...]


def schreier_tree(action, basepoint: int = 0) -> SchreierTree:
    """Schreier representatives by BFS over ``g1, g1^-1, g2, g2^-1, ...``."""
    perms = [as_perm(p) for p in action]
    inv_perms = [inverse(p) for p in perms]
    d = len(perms[0]) if perms else 1
    parent = [-1] * d
    letter = [0] * d
    reps: list = [None] * d
    reps[basepoint] = IDENTITY
    order = [basepoint]
    queue = deque([basepoint])
    while queue:
        x = queue.popleft()
        for i in range(len(perms)):
            for sign, table in ((1, perms[i]), (-1, inv_perms[i])):
                y = int(table[x])
                if reps[y] is None:
                    reps[y] = Word((sign * (i + 1),) + reps[x].letters)
                    parent[y] = x
                    letter[y] = sign * (i + 1)
                    order.append(y)
                    queue.append(y)
    if len(order) != d:
        raise ValidationError(f"action is not transitive ({len(order)} of {d} points reached)")
    return SchreierTree(basepoint, tuple(order), tuple(parent), tuple(letter), tuple(reps))


@dataclass(frozen=True)
class SubgroupPresentation:
    """Free basis and peripheral structure of a finite-index subgroup.

    ``basis`` words and ``peripherals`` words are written in the base
    generators; ``presentation`` re-expresses the peripherals in the basis.
    ``edge_index[x, g]`` is the basis index of the Schreier generator
    ``r_{g x}^-1 g r_x`` or -1 when that generator is trivial (a tree edge).
    """

    base: Presentation
    degree: int
    tree: SchreierTree
    basis: tuple[Word, ...]
    edge_index: np.ndarray = field(repr=False)
    peripherals: tuple[tuple[int, Word], ...]
    presentation: Presentation
    perms: tuple = field(repr=False, default=())

    @property
    def genus(self) -> int:
        return self.presentation.genus

    def rewrite(self, w: Word) -> Word:
        """Express ``w`` (an element of the subgroup) in the Schreier basis."""
        return _rewrite(w, self.perms, self.edge_index, self.tree.basepoint)


def _rewrite(w: Word, perms, edge_index, basepoint) -> Word:
    inv_perms = [inverse(p) for p in perms]
    x = basepoint
    out = []
    for l in reversed(w.letters):
        i = abs(l) - 1
        if l > 0:
            b = int(edge_index[x, i])
            if b >= 0:
                out.append(b + 1)
            x = int(perms[i][x])
        else:
            y = int(inv_perms[i][x])
            b = int(edge_index[y, i])
            if b >= 0:
                out.append(-(b + 1))
            x = y
    if x != basepoint:
        raise ValidationError(f"{w} does not lie in the subgroup")
    out.reverse()
    return Word(out)


def reidemeister_schreier(p: Presentation, action, basepoint: int = 0) -> SubgroupPresentation:
    """Free basis and peripheral words of the stabilizer of ``basepoint``.

    ``action`` gives one permutation of the coset points per generator of ``p``.
    The basis has ``1 + d (r - 1)`` elements.  Each cycle (length ``k``, least
    point ``x``) of the permutation of ``P_j`` gives one peripheral word
    ``r_x^-1 P_j^k r_x``.
    """
    perms = tuple(as_perm(a) for a in action)
    if len(perms) != p.free_rank:
        raise ValidationError(f"action has {len(perms)} permutations for rank {p.free_rank}")
    d = len(perms[0]) if perms else 1
    tree = schreier_tree(perms, basepoint)
    r = p.free_rank

    tree_edges = set()
    for y in tree.order[1:]:
        l = tree.letter[y]
        i = abs(l) - 1
        tree_edges.add((tree.parent[y], i) if l > 0 else (y, i))

    edge_index = -np.ones((d, r), dtype=np.int64)
    basis = []
    for x in range(d):
        for i in range(r):
            if (x, i) in tree_edges:
                continue
            gx = int(perms[i][x])
            edge_index[x, i] = len(basis)
            basis.append(tree.reps[gx].inverse() * Word.gen(i) * tree.reps[x])
    expected = 1 + d * (r - 1)
    if len(basis) != expected:
        raise InvariantError("Schreier rank formula", f"{len(basis)} basis words, expected {expected}")

    inv_perms = [inverse(q) for q in perms]
    peripherals = []
    sub_periph = []
    for j, pw in enumerate(p.peripherals):
        pp = word_perm(pw, perms, inv_perms)
        for cyc in cycles(pp):
            x = cyc[0]
            rx = tree.reps[x]
            word = rx.inverse() * pw ** len(cyc) * rx
            peripherals.append((j, word))
            sub_periph.append(_rewrite(word, perms, edge_index, basepoint))

    c_sub = len(peripherals)
    twice_genus = len(basis) + 1 - c_sub
    if twice_genus < 0 or twice_genus % 2:
        raise InvariantError("Riemann-Hurwitz", f"rank {len(basis)} with {c_sub} cusps gives no integral genus")
    sub = Presentation(twice_genus // 2, c_sub, tuple(f"s{i}" for i in range(len(basis))), tuple(sub_periph))
    return SubgroupPresentation(p, d, tree, tuple(basis), edge_index, tuple(peripherals), sub, perms)


# --- JSON ------------------------------------------------------------------

def word_to_json(w: Word) -> list[int]:
    return list(w.letters)


def word_from_json(data) -> Word:
    return Word([int(v) for v in data])


def presentation_to_json(p: Presentation) -> dict:
    return {
        "genus": p.genus,
        "cusps": p.cusps,
        "generators": list(p.generators),
        "peripherals": [word_to_json(w) for w in p.peripherals],
    }


def presentation_from_json(data: dict) -> Presentation:
    try:
        return Presentation(
            int(data["genus"]),
            int(data["cusps"]),
            tuple(str(s) for s in data["generators"]),
            tuple(word_from_json(w) for w in data["peripherals"]),
        )
    except KeyError as exc:
        raise ValidationError(f"presentation JSON is missing {exc}") from None


def assignment_to_json(a: FiniteAssignment) -> dict:
    return {"target": a.target.descriptor(), "images": [a.target.index(x) for x in a.images]}


def assignment_from_json(data: dict) -> FiniteAssignment:
    from .finite_groups import group_from_descriptor

    target = group_from_descriptor(data["target"])
    return FiniteAssignment(target, tuple(target.element(int(i)) for i in data["images"]))
