"""Packed-kernel correctness: packing round trips, backend agreement, sampling."""

import math

import numpy as np
import pytest

from sparsext import _kernels_py as kpy
from sparsext import kernels
from sparsext.gf2 import BitVector, Gf2Matrix, matvec
from sparsext.rng import generator, philox

try:
    from sparsext import _kernels_cy as kcy
except ImportError:  # pragma: no cover - fallback-only environments
    kcy = None

BACKENDS = [("numpy", kpy)] + ([("compiled", kcy)] if kcy else [])


def test_pack_round_trips():
    vals = [0, 1, (1 << 64) - 1, 1 << 64, (1 << 100) | 5]
    words = kpy.pack_ints(vals, 101)
    assert kpy.unpack_ints(words) == vals
    bits = kpy.unpack_bits(words, 101)
    assert np.array_equal(kpy.pack_bits(bits, 101), words)


def test_tail_mask():
    assert kpy.tail_mask(64) == (1 << 64) - 1
    assert kpy.tail_mask(3) == 0b111
    assert kpy.words_needed(64) == 1
    assert kpy.words_needed(65) == 2


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_matvec_indices_matches_gf2(name, mod):
    rng = generator(17)
    for cols in (5, 31, 64, 90):
        M = Gf2Matrix(6, cols, tuple(
            int(v) for v in rng.integers(0, 1 << min(cols, 63), size=6)))
        xs = [int(v) for v in rng.integers(0, 1 << min(cols, 63), size=40)]
        idx = mod.matvec_indices(kernels.matrix_words(M),
                                 kpy.pack_ints(xs, cols))
        expected = [matvec(M, BitVector(cols, x)).bits for x in xs]
        assert idx.tolist() == expected


@pytest.mark.skipif(kcy is None, reason="compiled backend not built")
def test_backends_agree_exactly_on_matvec():
    rng = generator(23)
    rows = rng.integers(0, 1 << 64, size=(12, 2), dtype=np.uint64)
    xs = rng.integers(0, 1 << 64, size=(500, 2), dtype=np.uint64)
    assert np.array_equal(kpy.matvec_indices(rows, xs),
                          kcy.matvec_indices(rows, xs))


def test_matvec_indices_rejects_wide_output():
    rows = np.zeros((64, 1), dtype=np.uint64)
    xs = np.zeros((1, 1), dtype=np.uint64)
    with pytest.raises(ValueError):
        kpy.matvec_indices(rows, xs)
    if kcy:
        with pytest.raises(ValueError):
            kcy.matvec_indices(rows, xs)


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_histogram_counts_sum_and_bias(name, mod):
    n, p, N = 48, 0.2, 1 << 15
    M = Gf2Matrix.identity(8)  # first 8 coordinates pass through
    rows = kpy.pack_ints([1 << j for j in range(8)], n)
    shift = np.zeros(1, dtype=np.uint64)
    counts = mod.biased_shift_histogram(rows, n, p, shift, N, philox(5, 1))
    assert counts.sum() == N
    # marginal frequency of each output bit should be ~ p
    idx = np.arange(256)
    for j in range(8):
        freq = counts[(idx >> j) & 1 == 1].sum() / N
        assert abs(freq - p) < 4 * math.sqrt(p * (1 - p) / N)


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_histogram_weight_floor_forces_uniform(name, mod):
    # a floor above n re-randomizes every draw, so the pass-through map of a
    # full-rank square matrix must look exactly uniform
    n, N = 10, 1 << 15
    rows = kpy.pack_ints([1 << j for j in range(10)], n)
    shift = np.zeros(1, dtype=np.uint64)
    counts = mod.biased_shift_histogram(rows, n, 0.01, shift, N, philox(6, 2),
                                        weight_floor=n + 1)
    assert counts.sum() == N
    # all 1024 cells populated roughly evenly: chi-square-ish loose check
    freq = counts / N
    assert abs(freq.mean() - 2.0 ** -n) < 1e-12
    assert freq.max() < 8 * 2.0 ** -n


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_histogram_shift_moves_cells(name, mod):
    # zero-bias source through identity: all mass lands exactly on the shift
    n = 6
    rows = kpy.pack_ints([1 << j for j in range(6)], n)
    shift_val = 0b101101
    shift = kpy.pack_ints([shift_val], n)[0]
    counts = mod.biased_shift_histogram(rows, n, 0.0, shift, 1000, philox(7))
    assert counts[shift_val] == 1000
    assert counts.sum() == 1000


@pytest.mark.skipif(kcy is None, reason="compiled backend not built")
def test_backends_statistically_equivalent_histograms():
    n, p, N = 64, 0.0417, 1 << 17
    rng = generator(31)
    rows = rng.integers(0, 1 << 64, size=(6, 1), dtype=np.uint64)
    shift = np.zeros(1, dtype=np.uint64)
    c1 = kpy.biased_shift_histogram(rows, n, p, shift, N, philox(8, 1))
    c2 = kcy.biased_shift_histogram(rows, n, p, shift, N, philox(8, 2))
    f1, f2 = c1 / N, c2 / N
    # per-cell binomial tolerance at 5 sigma with p-hat <= 1
    tol = 5 * math.sqrt(0.25 / N) * 2
    assert np.abs(f1 - f2).max() < tol


def test_sampler_helpers_match_weights():
    rng = generator(37)
    xw = kpy.biased_words(rng, 2000, 33, 0.25)
    w = kpy.weights(xw)
    mean = w.mean() / 33
    assert abs(mean - 0.25) < 4 * math.sqrt(0.25 * 0.75 / (2000 * 33))
    uw = kpy.uniform_words(rng, 2000, 33)
    assert (kpy.weights(uw) <= 33).all()
    assert abs(kpy.weights(uw).mean() / 33 - 0.5) < 0.02
