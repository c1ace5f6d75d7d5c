"""Numba switch.

Set ``PARALAB_DISABLE_NUMBA=1`` to force the pure-numpy code paths. The
flag is read once at import time.
"""

import os

DISABLED = os.environ.get("PARALAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    NUMBA_AVAILABLE = False
    _njit = None

USE_NUMBA = NUMBA_AVAILABLE and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if not NUMBA_AVAILABLE:
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda func: func
    return _njit(*args, **kwargs)
