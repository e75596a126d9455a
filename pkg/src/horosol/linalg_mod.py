"""Integer Smith normal form and linear systems over ``Z/m``.

Pure Python integers throughout; the matrices here are small (cusps x rank).
"""
from __future__ import annotations

from math import gcd


def _eye(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(A):
    """Return ``(U, D, V)`` with ``U A V = D`` diagonal and ``U, V`` unimodular.

    Only the diagonal shape matters to callers; the divisibility chain of the
    true Smith form is not enforced.  Zero columns of ``A`` are never mixed into
    other columns, so a variable that does not occur stays a free coordinate.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(map(int, row)) for row in A]
    U = _eye(m)
    V = _eye(n)
    t = 0
    while t < min(m, n):
        piv = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] and (piv is None or abs(D[i][j]) < abs(D[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        i, j = piv
        D[t], D[i] = D[i], D[t]
        U[t], U[i] = U[i], U[t]
        for row in D:
            row[t], row[j] = row[j], row[t]
        for row in V:
            row[t], row[j] = row[j], row[t]
        done = True
        for i in range(t + 1, m):
            q = D[i][t] // D[t][t]
            if q:
                D[i] = [a - q * b for a, b in zip(D[i], D[t])]
                U[i] = [a - q * b for a, b in zip(U[i], U[t])]
            if D[i][t]:
                done = False
        for j in range(t + 1, n):
            q = D[t][j] // D[t][t]
            if q:
                for row in D:
                    row[j] -= q * row[t]
                for row in V:
                    row[j] -= q * row[t]
            if D[t][j]:
                done = False
        if done:
            if D[t][t] < 0:
                D[t] = [-a for a in D[t]]
                U[t] = [-a for a in U[t]]
            t += 1
    return U, D, V


def _solve_diag(d: int, b: int, m: int):
    """Least ``y`` in ``[0, m)`` with ``d*y = b (mod m)``, or None."""
    d %= m
    b %= m
    g = gcd(d, m)
    if b % g:
        return None
    if d == 0:
        return 0
    mg = m // g
    return (b // g) * pow(d // g, -1, mg) % mg if mg > 1 else 0


def solve_mod(A, t, m: int):
    """A solution ``x`` of ``A x = t (mod m)`` or ``None``.

    Coordinates left free by the Smith form are set to 0, which makes the
    returned solution deterministic.
    """
    rows = len(A)
    if rows == 0:
        raise ValueError("solve_mod needs at least one equation")
    n = len(A[0])
    U, D, V = smith_normal_form(A)
    b = [sum(u * v for u, v in zip(Urow, t)) for Urow in U]
    y = [0] * n
    for i in range(rows):
        if i < n:
            yi = _solve_diag(D[i][i], b[i], m)
            if yi is None:
                return None
            y[i] = yi
        elif b[i] % m:
            return None
    return [sum(V[i][k] * y[k] for k in range(n)) % m for i in range(n)]


def kernel_vector_mod(A, m: int, which: int = 0):
    """A nonzero solution of ``A x = 0 (mod m)`` taken from the Smith form.

    ``which`` selects among the free coordinates (in order) the one set to 1.
    Returns None when there are not enough free coordinates.
    """
    rows = len(A)
    if rows == 0:
        raise ValueError("kernel_vector_mod needs at least one equation")
    n = len(A[0])
    _, D, V = smith_normal_form(A)
    free = [k for k in range(n) if (D[k][k] if k < rows else 0) % m == 0]
    if which >= len(free):
        return None
    k = free[which]
    # column k of a unimodular V is nonzero mod every prime, hence mod m
    return [V[i][k] % m for i in range(n)]
