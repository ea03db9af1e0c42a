"""Numba switch.

Kernels are compiled with numba when it is importable and the environment
variable ``DIGITLAW_NO_NUMBA`` is unset (or ``0``); otherwise the pure-numpy
implementations are used. Both implementations are always importable so the
benchmark and the equivalence tests can compare them side by side.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("DIGITLAW_NO_NUMBA", "0") in ("", "0")


def njit(func):
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
