"""Permutations of ``{0, ..., d-1}`` stored as integer arrays.

A permutation ``p`` sends ``x`` to ``p[x]``.  Permutations act on the left and
compose as functions: ``compose(s, t)[x] == s[t[x]]``.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from .errors import InvariantError


def as_perm(p) -> np.ndarray:
    return np.asarray(p, dtype=np.int64)


def identity(d: int) -> np.ndarray:
    return np.arange(d, dtype=np.int64)


def compose(s, t) -> np.ndarray:
    """Return ``s o t``, i.e. first ``t`` then ``s``."""
    s = as_perm(s)
    return s[as_perm(t)]


def inverse(p) -> np.ndarray:
    p = as_perm(p)
    inv = np.empty_like(p)
    inv[p] = np.arange(len(p), dtype=np.int64)
    return inv


def is_perm(p) -> bool:
    p = as_perm(p)
    return p.ndim == 1 and np.array_equal(np.sort(p), np.arange(len(p)))


def cycles(p) -> list[tuple[int, ...]]:
    """Cycles of ``p``, each starting at its least point, sorted by that point."""
    p = as_perm(p)
    seen = np.zeros(len(p), dtype=bool)
    out = []
    for start in range(len(p)):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        x = int(p[start])
        while x != start:
            cyc.append(x)
            seen[x] = True
            x = int(p[x])
        out.append(tuple(cyc))
    return out


def cycle_type(p) -> tuple[int, ...]:
    return tuple(sorted((len(c) for c in cycles(p)), reverse=True))


def orbit(gens, x0: int = 0) -> list[int]:
    """Orbit of ``x0`` under the group generated by ``gens`` (BFS order)."""
    gens = [as_perm(g) for g in gens]
    seen = {x0}
    order = [x0]
    queue = deque([x0])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = int(g[x])
            if y not in seen:
                seen.add(y)
                order.append(y)
                queue.append(y)
    return order


def is_transitive(gens, d: int) -> bool:
    if d == 0:
        return False
    if not gens:
        return d == 1
    return len(orbit(gens, 0)) == d


def generated_order(gens, limit: int = 100_000) -> int:
    """Order of the group generated by ``gens``, by closure.

    Raises ``InvariantError`` once the closure exceeds ``limit`` elements.
    """
    gens = [tuple(int(v) for v in as_perm(g)) for g in gens]
    if not gens:
        return 1
    d = len(gens[0])
    e = tuple(range(d))
    seen = {e}
    queue = deque([e])
    while queue:
        h = queue.popleft()
        for g in gens:
            gh = tuple(g[v] for v in h)
            if gh not in seen:
                seen.add(gh)
                if len(seen) > limit:
                    raise InvariantError("group closure", f"more than {limit} elements")
                queue.append(gh)
    return len(seen)
