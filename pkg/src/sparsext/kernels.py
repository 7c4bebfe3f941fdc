"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set ``SPARSEXT_NO_EXT=1`` to force the numpy fallback.  Only the hot entry
points (``matvec_indices``, ``biased_shift_histogram``) are compiled; packing
helpers always come from the numpy implementation.
"""

from __future__ import annotations

import os

import numpy as np

from ._kernels_py import (  # noqa: F401  (re-exported helpers)
    biased_words,
    pack_bits,
    pack_ints,
    popcount,
    tail_mask,
    uniform_words,
    unpack_bits,
    unpack_ints,
    weights,
    words_needed,
)
from ._kernels_py import biased_shift_histogram as _py_histogram
from ._kernels_py import matvec_indices as _py_matvec_indices

if os.environ.get("SPARSEXT_NO_EXT"):
    _ext = None
else:
    try:
        from . import _kernels_cy as _ext
    except ImportError:
        _ext = None

if _ext is not None:
    BACKEND = "compiled"
    matvec_indices = _ext.matvec_indices
    biased_shift_histogram = _ext.biased_shift_histogram
else:
    BACKEND = "numpy"
    matvec_indices = _py_matvec_indices
    biased_shift_histogram = _py_histogram


def matrix_words(M) -> np.ndarray:
    """Pack a :class:`sparsext.gf2.Gf2Matrix` into (rows, W) uint64 words."""
    return pack_ints(M.row_masks, M.cols)


__all__ = [
    "BACKEND",
    "biased_shift_histogram",
    "biased_words",
    "matrix_words",
    "matvec_indices",
    "pack_bits",
    "pack_ints",
    "popcount",
    "tail_mask",
    "uniform_words",
    "unpack_bits",
    "unpack_ints",
    "weights",
    "words_needed",
]
