"""Numba switch.

Set ``BFREE_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
path. If numba cannot be imported the numpy path is used as well.
"""
import os

_DISABLED = os.environ.get("BFREE_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba  # noqa: F401
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the test image
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


USE_NUMBA = HAVE_NUMBA and not _DISABLED

