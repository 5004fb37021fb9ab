"""Numba switch.

Hot kernels are compiled with numba when it is importable and the
environment variable ``AERIS_DISABLE_NUMBA`` is unset (or ``0``). Setting
``AERIS_DISABLE_NUMBA=1`` selects the pure-numpy fallback everywhere; both
paths consume the random stream in the same order and give bit-identical
results.
"""

import os

_FLAG = os.environ.get("AERIS_DISABLE_NUMBA", "0").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

NUMBA_AVAILABLE = _numba is not None
USE_NUMBA = NUMBA_AVAILABLE and _FLAG in ("", "0", "false", "no")


def njit(*args, **kwargs):
    """``numba.njit`` when numba is available, otherwise the identity.

    The decorated function is compiled even when ``USE_NUMBA`` is false so
    the benchmark can compare both paths; callers consult ``USE_NUMBA`` to
    pick one.
    """
    if NUMBA_AVAILABLE:
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def thread_count():
    """Worker bound from ``AERIS_THREADS`` (default 1)."""
    raw = os.environ.get("AERIS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
