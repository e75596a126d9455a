"""Optional numba acceleration.

Hot kernels are written once in loop form and compiled with ``numba.njit``
when numba is importable and ``HOROSOL_DISABLE_NUMBA`` is unset (or "0").
Every kernel also has a pure-numpy implementation; ``backend()`` reports which
one is the default.
"""
from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

DISABLED = os.environ.get("HOROSOL_DISABLE_NUMBA", "").strip() not in ("", "0")
HAVE_NUMBA = numba is not None and not DISABLED


def njit(fn):
    """Compile ``fn`` with numba if available, else return it unchanged."""
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def resolve(name: str | None) -> str:
    if name is None:
        return backend()
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and numba is None:
        raise ValueError("numba is not installed")
    return name


def set_threads(n: int | None) -> None:
    """Cap numba's worker count; results never depend on it."""
    if n and numba is not None:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
