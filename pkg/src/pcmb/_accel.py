"""Numba acceleration switch.

Hot kernels in :mod:`pcmb._kernels` are written as plain numpy code and
decorated with :func:`jit`.  By default they are compiled with numba's
``@njit(cache=True, nogil=True)``.  Setting the environment variable
``PCMB_BACKEND=numpy`` before import skips compilation entirely and runs
the same source as pure Python/numpy -- slow, but handy for debugging and
as a reference path for the backend benchmark (``python -m pcmb.benchmark``).
"""

import os

BACKEND = os.environ.get("PCMB_BACKEND", "numba").strip().lower()
if BACKEND not in ("numba", "numpy"):
    raise ValueError(f"PCMB_BACKEND must be 'numba' or 'numpy', got {BACKEND!r}")

NUMBA_ENABLED = BACKEND == "numba"

if NUMBA_ENABLED:
    from numba import njit as _njit

    def jit(fn):
        """Compile a hot kernel (nopython, GIL released, on-disk cache)."""
        return _njit(cache=True, nogil=True)(fn)

else:

    def jit(fn):
        """Pass-through when the pure-numpy backend is selected."""
        return fn
