"""Kernel selection: numba JIT builds vs pure-NumPy fallbacks.

Hot kernels ship in two variants. The active one is chosen once at import
time: numba is used when importable, unless ``LLMROUTE_NUMBA=0`` forces the
NumPy path. Both variants of every kernel perform the same floating-point
operations in the same order, so switching paths never changes results.
"""

import os
import warnings

_flag = os.environ.get("LLMROUTE_NUMBA", "").strip().lower()

if _flag in ("0", "false", "off", "no"):
    NUMBA_ENABLED = False
else:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False
        if _flag in ("1", "true", "on", "yes"):
            warnings.warn(
                "LLMROUTE_NUMBA requested the JIT path but numba is not "
                "importable; falling back to NumPy kernels"
            )

if NUMBA_ENABLED:
    from numba import njit
else:

    def njit(*args, **kwargs):
        # no-op decorator so kernel modules import without numba
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def pick(numba_impl, numpy_impl):
    """Return the active implementation of a dual-path kernel."""
    return numba_impl if NUMBA_ENABLED else numpy_impl
