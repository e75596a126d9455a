"""Finite target groups for assignments of free generators.

Each handle exposes ``identity``, ``mul``, ``inv``, a canonical integer
``index`` for its elements (used by the JSON formats), and a left action
``act`` on a finite point set.  Assignments into a handle define finite covers:
the cover's fiber is the orbit of point 0 under the assigned images.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import factorial, gcd

from .errors import ValidationError


@dataclass(frozen=True)
class CyclicGroup:
    """``Z/m`` written additively; acts on itself by translation."""

    m: int
    kind = "cyclic"

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError(f"cyclic group order must be >= 1, got {self.m}")

    @property
    def identity(self):
        return 0

    def mul(self, x, y):
        return (x + y) % self.m

    def inv(self, x):
        return (-x) % self.m

    def validate(self, x):
        if not (isinstance(x, int) and 0 <= x < self.m):
            raise ValidationError(f"{x!r} is not an element of Z/{self.m}")
        return x

    def index(self, x) -> int:
        return self.validate(x)

    def element(self, i: int):
        return self.validate(i)

    def act(self, x, y):
        return (x + y) % self.m

    def order(self) -> int:
        return self.m

    def descriptor(self) -> dict:
        return {"kind": self.kind, "m": self.m}


@dataclass(frozen=True)
class PermutationGroup:
    """Permutations of ``d`` points (a subgroup of ``S_d``), as tuples.

    Composition is left-acting: ``mul(s, t)`` first applies ``t``.  The canonical
    index of an element is its lexicographic rank in ``S_d``.
    """

    d: int
    kind = "perm"

    @property
    def identity(self):
        return tuple(range(self.d))

    def mul(self, s, t):
        return tuple(s[x] for x in t)

    def inv(self, s):
        out = [0] * self.d
        for x, y in enumerate(s):
            out[y] = x
        return tuple(out)

    def validate(self, s):
        s = tuple(int(v) for v in s)
        if sorted(s) != list(range(self.d)):
            raise ValidationError(f"{s!r} is not a permutation of {self.d} points")
        return s

    def index(self, s) -> int:
        s = self.validate(s)
        rank = 0
        rest = list(range(self.d))
        for pos, v in enumerate(s):
            i = rest.index(v)
            rank += i * factorial(self.d - 1 - pos)
            rest.pop(i)
        return rank

    def element(self, i: int):
        if not 0 <= i < factorial(self.d):
            raise ValidationError(f"index {i} out of range for S_{self.d}")
        rest = list(range(self.d))
        out = []
        for pos in range(self.d):
            f = factorial(self.d - 1 - pos)
            out.append(rest.pop(i // f))
            i %= f
        return tuple(out)

    def act(self, s, x):
        return s[x]

    def elements(self):
        return [tuple(p) for p in permutations(range(self.d))]

    def order(self) -> int:
        return factorial(self.d)

    def descriptor(self) -> dict:
        return {"kind": self.kind, "d": self.d}


@dataclass(frozen=True)
class AffineGroup:
    """Affine maps ``x -> a*x + b`` of ``Z/p^k`` with ``a`` a unit.

    Elements are pairs ``(a, b)``; ``mul((a, b), (a2, b2)) = (a*a2, a*b2 + b)``,
    i.e. the composite map that applies ``(a2, b2)`` first.
    """

    p: int
    k: int
    kind = "affine"

    @property
    def n(self) -> int:
        return self.p ** self.k

    @property
    def identity(self):
        return (1 % self.n, 0)

    def mul(self, f, g):
        a, b = f
        a2, b2 = g
        n = self.n
        return ((a * a2) % n, (a * b2 + b) % n)

    def inv(self, f):
        a, b = f
        n = self.n
        ai = pow(a, -1, n) if n > 1 else 0
        return (ai, (-ai * b) % n)

    def validate(self, f):
        a, b = (int(v) for v in f)
        n = self.n
        if not (0 <= a < n and 0 <= b < n):
            raise ValidationError(f"{f!r} has entries outside Z/{n}")
        if n > 1 and gcd(a, self.p) != 1:
            raise ValidationError(f"{f!r}: multiplier {a} is not a unit mod {self.p}^{self.k}")
        return (a, b)

    def index(self, f) -> int:
        a, b = self.validate(f)
        return a * self.n + b

    def element(self, i: int):
        return self.validate(divmod(i, self.n))

    def act(self, f, x):
        a, b = f
        return (a * x + b) % self.n

    def elements(self):
        n = self.n
        return [(a, b) for a in range(n) if n == 1 or gcd(a, self.p) == 1 for b in range(n)]

    def order(self) -> int:
        return len(self.elements())

    def descriptor(self) -> dict:
        return {"kind": self.kind, "p": self.p, "k": self.k}


def group_from_descriptor(desc: dict):
    kind = desc.get("kind")
    if kind == "cyclic":
        return CyclicGroup(int(desc["m"]))
    if kind == "perm":
        return PermutationGroup(int(desc["d"]))
    if kind == "affine":
        return AffineGroup(int(desc["p"]), int(desc["k"]))
    if kind == "psl2":
        from .congruence import PSL2Mod
        return PSL2Mod(int(desc["n"]))
    raise ValidationError(f"unknown target group descriptor {desc!r}")
