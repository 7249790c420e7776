"""Geometry kernel backend selection.

The hot per-frame loops (normalization, angle features, displacement)
exist twice: a numba-compiled backend and a vectorized pure-numpy one.
Numba is the default when importable; set IMIGAME_NO_NUMBA=1 to force
the numpy path (useful for debugging and as the comparison baseline in
benchmarks/bench_kernels.py).
"""

import os

from .defs import *  # noqa: F401,F403 - shared index tables

_FORCE_NUMPY = os.environ.get("IMIGAME_NO_NUMBA", "").strip().lower() in (
    "1", "true", "yes")

if not _FORCE_NUMPY:
    try:
        from .numba_backend import (  # noqa: F401
            displacement_series, features_batch, normalize_batch)
        BACKEND = "numba"
    except ImportError:
        _FORCE_NUMPY = True

if _FORCE_NUMPY:
    from .numpy_backend import (  # noqa: F401
        displacement_series, features_batch, normalize_batch)
    BACKEND = "numpy"
