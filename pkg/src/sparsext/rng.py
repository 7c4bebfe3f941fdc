"""Deterministic randomness based on counter-mode Philox streams.

Every random choice in the package derives from a root seed plus a tuple of
nonnegative integers naming the work unit, e.g. ``generator(seed, weight_idx,
matrix_idx)``.  Distinct paths give independent streams, so parallel workers
and sequential runs produce identical results for a fixed seed.
"""

from __future__ import annotations

import numpy as np

__all__ = ["generator", "philox"]


def _entropy(path: tuple[int, ...]) -> list[int]:
    if not path:
        raise ValueError("seed path must not be empty")
    out = []
    for p in path:
        if not isinstance(p, (int, np.integer)):
            raise TypeError(f"seed path entries must be ints, got {type(p)}")
        if p < 0:
            raise ValueError("seed path entries must be >= 0")
        out.append(int(p))
    return out


def philox(*path: int) -> np.random.Philox:
    """Philox counter-based bit generator keyed by the seed path."""
    return np.random.Philox(np.random.SeedSequence(_entropy(path)))


def generator(*path: int) -> np.random.Generator:
    """numpy Generator over :func:`philox` for the same path."""
    return np.random.Generator(philox(*path))
