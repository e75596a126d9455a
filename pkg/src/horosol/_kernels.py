"""Hot loops with a numba implementation and a pure-numpy fallback.

* ``reduce_batch``: fundamental-domain reduction of many PSL(2,R) matrices,
  carrying a fiber address through the applied S / T^k letters.
* ``one_cusp_search``: exhaustive scan of assignments of a one-cusp surface
  group into ``S_k`` for one-cusp regular actions.
"""
from __future__ import annotations

from itertools import permutations

import numpy as np

from ._accel import njit, resolve
from .errors import InvariantError

MAX_STEPS = 10_000
_TOL = 1e-12


# --- fundamental-domain reduction ----------------------------------------------

@njit
def _reduce_loop(M, addr, s_perm, t_start, t_len, t_pos, t_members, max_steps, steps):
    N = M.shape[0]
    for i in range(N):
        a = M[i, 0]
        b = M[i, 1]
        c = M[i, 2]
        d = M[i, 3]
        x = addr[i]
        done = False
        k = 0
        while True:
            den = c * c + d * d
            re = (a * c + b * d) / den
            terminal = abs(re) <= 0.5 and a * a + b * b >= den * (1.0 - _TOL)
            if terminal:
                done = True
                break
            if k == max_steps:
                break
            if abs(re) > 0.5:
                n = np.floor(re + 0.5)
                a = a - n * c
                b = b - n * d
                sh = -np.int64(n)
                x = t_members[t_start[x] + (t_pos[x] + sh) % t_len[x]]
            else:
                a, b, c, d = -c, -d, a, b
                x = s_perm[x]
            k += 1
        steps[i] = k if done else -1
        if a < 0.0 or (a == 0.0 and b < 0.0):
            a, b, c, d = -a, -b, -c, -d
        r = 1.0 / np.sqrt(a * d - b * c)
        M[i, 0] = a * r
        M[i, 1] = b * r
        M[i, 2] = c * r
        M[i, 3] = d * r
        addr[i] = x


def _reduce_numpy(M, addr, s_perm, t_start, t_len, t_pos, t_members, max_steps, steps):
    a, b, c, d = (M[:, j].copy() for j in range(4))
    active = np.arange(len(M))
    steps[:] = -1
    for k in range(max_steps + 1):
        if not len(active):
            break
        aa, bb, cc, dd = a[active], b[active], c[active], d[active]
        x = addr[active]
        den = cc * cc + dd * dd
        re = (aa * cc + bb * dd) / den
        tr = np.abs(re) > 0.5
        inv = ~tr & (aa * aa + bb * bb < den * (1.0 - _TOL))
        fin = ~tr & ~inv
        steps[active[fin]] = k
        if k == max_steps:
            break
        n = np.floor(re[tr] + 0.5)
        ia = active[tr]
        a[ia] = aa[tr] - n * cc[tr]
        b[ia] = bb[tr] - n * dd[tr]
        xt = x[tr]
        addr[ia] = t_members[t_start[xt] + np.mod(t_pos[xt] - n.astype(np.int64), t_len[xt])]
        ib = active[inv]
        a[ib], b[ib], c[ib], d[ib] = -cc[inv], -dd[inv], aa[inv], bb[inv]
        addr[ib] = s_perm[x[inv]]
        active = active[~fin]
    neg = (a < 0.0) | ((a == 0.0) & (b < 0.0))
    a[neg], b[neg], c[neg], d[neg] = -a[neg], -b[neg], -c[neg], -d[neg]
    r = 1.0 / np.sqrt(a * d - b * c)
    M[:, 0], M[:, 1], M[:, 2], M[:, 3] = a * r, b * r, c * r, d * r


def trivial_tables():
    one = np.zeros(1, dtype=np.int64)
    return one, one.copy(), np.ones(1, dtype=np.int64), one.copy(), one.copy()


def reduce_batch(M, addr=None, tables=None, max_steps: int = MAX_STEPS, backend: str | None = None):
    """Reduce the rows ``(a, b, c, d)`` of ``M`` into the standard domain.

    ``tables = (s_perm, t_start, t_len, t_pos, t_members)`` describe the S and
    T actions on the fiber; ``addr`` is updated by every applied letter.
    Returns ``(M_reduced, addr, steps)``.
    """
    M = np.array(M, dtype=np.float64, copy=True).reshape(-1, 4)
    addr = np.zeros(len(M), dtype=np.int64) if addr is None else np.array(addr, dtype=np.int64, copy=True)
    tables = trivial_tables() if tables is None else tuple(np.asarray(t, dtype=np.int64) for t in tables)
    steps = np.empty(len(M), dtype=np.int64)
    if resolve(backend) == "numba":
        _reduce_loop(M, addr, *tables, max_steps, steps)
    else:
        _reduce_numpy(M, addr, *tables, max_steps, steps)
    if (steps < 0).any():
        raise InvariantError("reduction convergence", f"{int((steps < 0).sum())} points not reduced in {max_steps} steps")
    return M, addr, steps


# --- one-cusp regular cover search -------------------------------------------------

def symmetric_group_tables(k: int):
    """Elements of ``S_k`` (lexicographic), multiplication ``s o t``, inverses,
    and a flag for full ``k``-cycles."""
    elems = [tuple(p) for p in permutations(range(k))]
    index = {p: i for i, p in enumerate(elems)}
    n = len(elems)
    mult = np.empty((n, n), dtype=np.int64)
    for i, s in enumerate(elems):
        for j, t in enumerate(elems):
            mult[i, j] = index[tuple(s[x] for x in t)]
    inv = np.empty(n, dtype=np.int64)
    for i, s in enumerate(elems):
        r = [0] * k
        for x, y in enumerate(s):
            r[y] = x
        inv[i] = index[tuple(r)]
    full = np.zeros(n, dtype=np.bool_)
    for i, s in enumerate(elems):
        x, length = s[0], 1
        while x != 0:
            x, length = s[x], length + 1
        full[i] = length == k
    return np.array(elems, dtype=np.int64).reshape(n, k), mult, inv, full


@njit
def _search_loop(act, mult, inv, full, r, k, counts, witness):
    n = mult.shape[0]
    total = n ** r
    idx = np.zeros(r, dtype=np.int64)
    member = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    orbit = np.zeros(k, dtype=np.bool_)
    stack = np.empty(k, dtype=np.int64)
    for code in range(total):
        c = code
        for j in range(r):
            idx[j] = c % n
            c //= n
        # peripheral = [a1,b1][a2,b2]...
        p = 0
        for h in range(r // 2):
            x = idx[2 * h]
            y = idx[2 * h + 1]
            cm = mult[mult[mult[x, y], inv[x]], inv[y]]
            p = mult[p, cm]
        counts[0] += 1
        if not full[p]:
            continue
        counts[1] += 1
        # transitivity: orbit of point 0
        orbit[:] = False
        orbit[0] = True
        stack[0] = 0
        top = 1
        seen = 1
        while top > 0:
            top -= 1
            pt = stack[top]
            for j in range(r):
                q = act[idx[j], pt]
                if not orbit[q]:
                    orbit[q] = True
                    stack[top] = q
                    top += 1
                    seen += 1
        if seen != k:
            continue
        counts[2] += 1
        # order of the generated group, stopping once it exceeds k
        member[:] = False
        member[0] = True
        queue[0] = 0
        head = 0
        tail = 1
        while head < tail and tail <= k:
            e = queue[head]
            head += 1
            for j in range(r):
                f = mult[idx[j], e]
                if not member[f]:
                    member[f] = True
                    queue[tail] = f
                    tail += 1
                    if tail > k:
                        break
        if tail == k:
            counts[3] += 1
            if witness[0] < 0:
                witness[0] = code


def _search_numpy(act, mult, inv, full, r, k, counts, witness):
    n = mult.shape[0]
    codes = np.arange(n ** r, dtype=np.int64)
    idx = [(codes // n ** j) % n for j in range(r)]
    p = np.zeros(len(codes), dtype=np.int64)
    for h in range(r // 2):
        x, y = idx[2 * h], idx[2 * h + 1]
        p = mult[p, mult[mult[mult[x, y], inv[x]], inv[y]]]
    counts[0] += len(codes)
    sel = full[p]
    counts[1] += int(sel.sum())
    cand = codes[sel]
    gens = [g[sel] for g in idx]
    rows = np.arange(len(cand))
    orbit = np.zeros((len(cand), k), dtype=bool)
    orbit[:, 0] = True
    for _ in range(k):
        for g in gens:
            for pt in range(k):
                orbit[rows, act[g, pt]] |= orbit[:, pt]
    trans = orbit.all(axis=1)
    counts[2] += int(trans.sum())
    cand = cand[trans]
    gens = [g[trans] for g in gens]
    rows = np.arange(len(cand))
    member = np.zeros((len(cand), n), dtype=bool)
    member[:, 0] = True
    for _ in range(n):
        before = member.sum()
        for g in gens:
            for e in range(n):
                member[rows, mult[g, e]] |= member[:, e]
        if member.sum() == before:
            break
    regular = member.sum(axis=1) == k
    counts[3] += int(regular.sum())
    if regular.any() and witness[0] < 0:
        witness[0] = int(cand[regular][0])


def one_cusp_search(genus: int, k: int, backend: str | None = None) -> dict:
    """Scan all assignments of ``pi_1(S_{genus,1})`` into ``S_k``.

    Counts assignments whose peripheral is a single ``k``-cycle (one cusp),
    those that are also transitive, and those whose image has order ``k``
    (regular).  ``witness`` is the first regular assignment in scan order.
    """
    act, mult, inv, full = symmetric_group_tables(k)
    r = 2 * genus
    counts = np.zeros(4, dtype=np.int64)
    witness = -np.ones(1, dtype=np.int64)
    if resolve(backend) == "numba":
        _search_loop(act, mult, inv, full, r, k, counts, witness)
    else:
        _search_numpy(act, mult, inv, full, r, k, counts, witness)
    wit = None
    if witness[0] >= 0:
        n = mult.shape[0]
        wit = [act[(int(witness[0]) // n ** j) % n].tolist() for j in range(r)]
    return {"genus": genus, "k": k, "assignments": int(counts[0]), "one_cusp": int(counts[1]),
            "transitive_one_cusp": int(counts[2]), "regular_one_cusp": int(counts[3]), "witness": wit}
