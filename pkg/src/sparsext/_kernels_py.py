"""Numpy fallback kernels for packed batch evaluation and biased sampling.

Vectors live in little-endian uint64 words: coordinate ``i`` sits in word
``i // 64`` at bit ``i % 64``, matching the int packing in :mod:`sparsext.gf2`.
The compiled backend (``_kernels_cy``) overrides the two hot entry points
``matvec_indices`` and ``biased_shift_histogram`` with identical semantics;
sampling kernels draw from the supplied bit generator in a backend-specific
order, so the two backends are statistically (not bitwise) interchangeable.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"

_CHUNK = 1 << 16


def words_needed(n: int) -> int:
    return (n + 63) // 64


def tail_mask(n: int) -> int:
    """Mask of valid bits in the last word of an n-bit vector."""
    rem = n % 64
    return (1 << rem) - 1 if rem else (1 << 64) - 1


def pack_ints(values, n: int) -> np.ndarray:
    """Pack python-int bit masks into an (N, W) uint64 array."""
    W = words_needed(n)
    out = np.empty((len(values), W), dtype=np.uint64)
    mask = (1 << 64) - 1
    for i, v in enumerate(values):
        v = int(v)
        for w in range(W):
            out[i, w] = (v >> (64 * w)) & mask
    return out


def unpack_ints(words: np.ndarray) -> list[int]:
    """Inverse of :func:`pack_ints`."""
    out = []
    for row in np.atleast_2d(words):
        v = 0
        for w, word in enumerate(row):
            v |= int(word) << (64 * w)
        out.append(v)
    return out


def pack_bits(bits: np.ndarray, n: int) -> np.ndarray:
    """Pack an (N, n) 0/1 array into (N, W) uint64 words."""
    W = words_needed(n)
    padded = np.zeros((bits.shape[0], W * 64), dtype=np.uint8)
    padded[:, :n] = bits
    as_bytes = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(as_bytes).view(np.uint64)


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`: (N, W) words -> (N, n) uint8."""
    as_bytes = np.ascontiguousarray(words).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :n]


def popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a)


def weights(xs: np.ndarray) -> np.ndarray:
    """Hamming weight per row of an (N, W) word array."""
    return np.bitwise_count(xs).sum(axis=1, dtype=np.int64)


def matvec_indices(row_words: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Batch Mx for packed samples, returning packed m-bit output indices.

    ``row_words`` is (m, W) uint64, ``xs`` is (N, W) uint64; the result is an
    (N,) int64 array whose bit j is the parity of row j AND x.  Requires
    m <= 63.
    """
    m = row_words.shape[0]
    if m > 63:
        raise ValueError(f"too many output bits for packed indices: {m}")
    idx = np.zeros(xs.shape[0], dtype=np.int64)
    for j in range(m):
        par = np.bitwise_count(xs & row_words[j]).sum(axis=1, dtype=np.int64) & 1
        idx |= par << j
    return idx


def uniform_words(rng: np.random.Generator, num: int, n: int) -> np.ndarray:
    """num uniform n-bit samples as (num, W) words."""
    W = words_needed(n)
    out = rng.integers(0, 1 << 64, size=(num, W), dtype=np.uint64)
    out[:, W - 1] &= np.uint64(tail_mask(n))
    return out


def biased_words(rng: np.random.Generator, num: int, n: int, p: float) -> np.ndarray:
    """num p-biased n-bit samples (each bit 1 with probability p)."""
    bits = rng.random((num, n)) < p
    return pack_bits(bits.astype(np.uint8), n)


def biased_shift_histogram(row_words: np.ndarray, n: int, p: float,
                           shift_words: np.ndarray, num_samples: int,
                           bit_generator, weight_floor: float | None = None,
                           ) -> np.ndarray:
    """Histogram of M(x + shift) over p-biased samples x.

    Draws ``num_samples`` p-biased n-bit strings; when ``weight_floor`` is
    given, any draw of Hamming weight strictly below it is replaced by a
    fresh uniform string (the truncated-source rule).  Each sample is XORed
    with ``shift_words`` and pushed through the m-row matrix; returns int64
    counts over the 2^m output cells.
    """
    m = row_words.shape[0]
    if m > 24:
        raise ValueError(f"histogram table too large: m={m}")
    rng = np.random.Generator(bit_generator)
    counts = np.zeros(1 << m, dtype=np.int64)
    shift = shift_words[np.newaxis, :]
    remaining = num_samples
    while remaining > 0:
        c = min(_CHUNK, remaining)
        xw = biased_words(rng, c, n, p)
        if weight_floor is not None and weight_floor > 0:
            bad = weights(xw) < weight_floor
            nbad = int(bad.sum())
            if nbad:
                xw[bad] = uniform_words(rng, nbad, n)
        xw ^= shift
        idx = matvec_indices(row_words, xw)
        counts += np.bincount(idx, minlength=1 << m)
        remaining -= c
    return counts
