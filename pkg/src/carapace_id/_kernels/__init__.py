"""Hot inner loops, compiled with numba when available.

Set ``CARAPACE_ID_BACKEND=numpy`` to force the pure-numpy path (useful for
debugging and on platforms without numba). Both backends expose the same
functions and are tested against each other.
"""

import os

from . import _numpy

BACKEND = os.environ.get("CARAPACE_ID_BACKEND", "numba").strip().lower()

if BACKEND not in ("numba", "numpy"):
    raise ImportError(f"CARAPACE_ID_BACKEND must be 'numba' or 'numpy', got {BACKEND!r}")

if BACKEND == "numba":
    try:
        from . import _numba as _impl
    except ImportError:  # numba missing or broken
        BACKEND = "numpy"
        _impl = _numpy
else:
    _impl = _numpy

correlate_replicate = _impl.correlate_replicate
warp_affine = _impl.warp_affine
cell_histograms = _impl.cell_histograms
fast_scores = _impl.fast_scores
brief_bits = _impl.brief_bits
hamming_matrix = _impl.hamming_matrix

__all__ = [
    "BACKEND",
    "correlate_replicate",
    "warp_affine",
    "cell_histograms",
    "fast_scores",
    "brief_bits",
    "hamming_matrix",
]
