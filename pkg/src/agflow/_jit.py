"""Backend switch for the compiled kernels.

Set ``AGFLOW_DISABLE_NUMBA=1`` (or have numba missing) to run every hot
loop through its pure-numpy implementation instead.
"""

import os

_FALSY = ("", "0", "false", "no", "off")

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("AGFLOW_DISABLE_NUMBA", "").strip().lower() in _FALSY


def njit(fn):
    """Compile ``fn`` with numba when available, otherwise return it untouched."""
    if not HAS_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def backend():
    return "numba" if USE_NUMBA else "numpy"

