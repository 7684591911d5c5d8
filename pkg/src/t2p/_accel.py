"""Optional numba acceleration.

Hot loops are written once as plain Python over numpy arrays. When numba is
importable and ``T2P_DISABLE_NUMBA`` is unset, they are compiled with
``@njit``; otherwise each kernel module binds a vectorised numpy version
instead. The switch is read once at import time.
"""

import os

_FALSEY = ("", "0", "false", "no", "off")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is an optional extra
    _numba = None

HAVE_NUMBA = _numba is not None
DISABLED = os.environ.get("T2P_DISABLE_NUMBA", "0").strip().lower() not in _FALSEY
USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(func):
    """Compile ``func`` in nopython mode, or return ``None`` without numba.

    ``fastmath`` stays off so summation order (and therefore bit patterns)
    is the same as the source loop.
    """
    if not HAVE_NUMBA:
        return None
    return _numba.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
