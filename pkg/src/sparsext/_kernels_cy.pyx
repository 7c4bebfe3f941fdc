# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: packed GF(2) batch matvec and fused biased sampling.

Drop-in replacements for the hot entry points in ``_kernels_py``.  The fused
histogram draws p-biased bits by geometric gap skipping straight from the
supplied bit generator, so it never materializes the sample array; results
are statistically equivalent to (but not bitwise identical with) the numpy
fallback, which consumes the stream in a different order.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport log, log1p
from libc.stdint cimport int64_t, uint64_t
from numpy.random cimport bitgen_t

cnp.import_array()

BACKEND = "compiled"

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #define SPARSEXT_POPCNT(x) __builtin_popcountll(x)
    #else
    static int SPARSEXT_POPCNT(unsigned long long v) {
        int c = 0;
        while (v) { v &= v - 1; c++; }
        return c;
    }
    #endif
    """
    int SPARSEXT_POPCNT(unsigned long long x) nogil


cdef inline uint64_t _tail_mask(int n) nogil:
    cdef int rem = n & 63
    if rem == 0:
        return <uint64_t>0xFFFFFFFFFFFFFFFFULL
    return ((<uint64_t>1) << rem) - 1


def matvec_indices(row_words, xs):
    """Batch Mx for packed samples; see the numpy twin for the contract."""
    cdef const uint64_t[:, ::1] rows = np.ascontiguousarray(row_words, dtype=np.uint64)
    cdef const uint64_t[:, ::1] x = np.ascontiguousarray(xs, dtype=np.uint64)
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t W = rows.shape[1]
    if m > 63:
        raise ValueError(f"too many output bits for packed indices: {m}")
    if x.shape[1] != W:
        raise ValueError("word counts differ between matrix and samples")
    cdef Py_ssize_t N = x.shape[0]
    out_arr = np.empty(N, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t i, j, w
    cdef int par
    cdef int64_t idx
    with nogil:
        for i in range(N):
            idx = 0
            for j in range(m):
                par = 0
                for w in range(W):
                    par ^= SPARSEXT_POPCNT(rows[j, w] & x[i, w])
                idx |= (<int64_t>(par & 1)) << j
            out[i] = idx
    return out_arr


def biased_shift_histogram(row_words, int n, double p, shift_words,
                           long num_samples, bit_generator,
                           weight_floor=None):
    """Histogram of M(x + shift) over p-biased samples x; see the numpy twin."""
    cdef const uint64_t[:, ::1] rows = np.ascontiguousarray(row_words, dtype=np.uint64)
    cdef const uint64_t[::1] shift = np.ascontiguousarray(shift_words, dtype=np.uint64)
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t W = rows.shape[1]
    if m > 24:
        raise ValueError(f"histogram table too large: m={m}")
    if shift.shape[0] != W or (n + 63) // 64 != W:
        raise ValueError("word counts disagree with the bit length")
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p out of [0, 1): {p}")

    counts_arr = np.zeros(1 << m, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    cdef double floor_val = -1.0
    if weight_floor is not None:
        floor_val = float(weight_floor)

    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("expected a numpy BitGenerator")
    cdef bitgen_t *rng = <bitgen_t *>PyCapsule_GetPointer(capsule, "BitGenerator")

    cdef uint64_t x[64]
    if W > 64:
        raise ValueError("bit length beyond 4096 not supported")
    cdef uint64_t last_mask = _tail_mask(n)
    cdef double inv_log1m = 0.0
    if p > 0.0:
        inv_log1m = 1.0 / log1p(-p)
    cdef Py_ssize_t i, j, w
    cdef long s
    cdef int64_t pos, gap
    cdef double u
    cdef int weight, par
    cdef int64_t idx

    with bit_generator.lock, nogil:
        for s in range(num_samples):
            for w in range(W):
                x[w] = 0
            weight = 0
            if p > 0.0:
                pos = 0
                while True:
                    u = 1.0 - rng.next_double(rng.state)
                    gap = <int64_t>(log(u) * inv_log1m)
                    pos += gap
                    if pos >= n:
                        break
                    x[pos >> 6] |= (<uint64_t>1) << (pos & 63)
                    weight += 1
                    pos += 1
            if floor_val > 0.0 and weight < floor_val:
                for w in range(W):
                    x[w] = rng.next_uint64(rng.state)
                x[W - 1] &= last_mask
            idx = 0
            for j in range(m):
                par = 0
                for w in range(W):
                    par ^= SPARSEXT_POPCNT(rows[j, w] & (x[w] ^ shift[w]))
                idx |= (<int64_t>(par & 1)) << j
            counts[idx] += 1
    return counts_arr
