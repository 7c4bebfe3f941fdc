"""Distributions over n-bit strings: exact tables, seeded samplers, entropy math.

Exact probability tables (:class:`ExplicitDistribution`) are dense float64
arrays indexed by the packed value of the string, capped at n = 24 bits.
:class:`SourceSampler` produces packed uint64 samples for any n; sample i is a
deterministic function of (seed, i), independent of how many samples are
requested, because draws are generated in fixed-size chunks with per-chunk
derived streams.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from . import kernels
from .gf2 import BitVector
from .rng import generator

__all__ = [
    "ExplicitDistribution",
    "MAX_TABLE_BITS",
    "SourceSampler",
    "biased_table",
    "binary_entropy",
    "deficient_mass",
    "entropy_inverse_bounds",
    "flat_source",
    "min_entropy",
    "point_mass",
    "shift_distribution",
    "solve_bias",
    "truncated_biased_max_prob",
    "truncated_biased_table",
    "truncation_floor",
    "uniform_distribution",
]

MAX_TABLE_BITS = 24

_SAMPLE_CHUNK = 1 << 16


def binary_entropy(p: float) -> float:
    """H(p) = -p log2 p - (1-p) log2(1-p) in bits, with 0 log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of [0, 1]: {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))


def entropy_inverse_bounds(p: float) -> tuple[float, float]:
    """Closed-form sandwich on p in terms of H(p), valid on (0, 1/2].

    Returns (H(p)/(6 log2(2/H(p))), H(p)/log2(1/H(p))); the second value is
    +inf at p = 1/2 where the denominator vanishes.  Both always satisfy
    lower <= p <= upper.
    """
    if not 0.0 < p <= 0.5:
        raise ValueError(f"p out of (0, 1/2]: {p}")
    h = binary_entropy(p)
    lower = h / (6.0 * math.log2(2.0 / h))
    upper = math.inf if h == 1.0 else h / math.log2(1.0 / h)
    return lower, upper


def solve_bias(target: float) -> float:
    """The unique p in (0, 1/2] with H(p) = target, by bisection."""
    if not 0.0 < target <= 1.0:
        raise ValueError(f"entropy target out of (0, 1]: {target}")
    if target == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5  # H is strictly increasing on [0, 1/2]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if binary_entropy(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi if abs(binary_entropy(hi) - target) < abs(binary_entropy(lo) - target) else lo


@dataclass(frozen=True)
class ExplicitDistribution:
    """Exact probability table over n-bit strings, indexed by packed value."""

    n: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 1 <= self.n <= MAX_TABLE_BITS:
            raise ValueError(f"explicit tables support 1 <= n <= {MAX_TABLE_BITS}")
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (1 << self.n,):
            raise ValueError(f"table must have 2^{self.n} entries")
        if np.any(probs < 0):
            raise ValueError("negative probability")
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def prob(self, value: int | BitVector) -> float:
        if isinstance(value, BitVector):
            value = value.bits
        return float(self.probs[value])

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs)

    def to_csv(self, fp: TextIO) -> None:
        """Dump as CSV with header ``bits,prob`` (coordinate 0 first)."""
        fp.write("bits,prob\n")
        for v in range(1 << self.n):
            bits = "".join(str((v >> i) & 1) for i in range(self.n))
            fp.write(f"{bits},{float(self.probs[v])!r}\n")


def uniform_distribution(n: int) -> ExplicitDistribution:
    return ExplicitDistribution(n, np.full(1 << n, 2.0 ** -n))


def point_mass(n: int, value: int) -> ExplicitDistribution:
    probs = np.zeros(1 << n)
    probs[value] = 1.0
    return ExplicitDistribution(n, probs)


def flat_source(support, n: int) -> ExplicitDistribution:
    """Uniform distribution on the given packed values (min-entropy log2 |S|)."""
    vals = [v.bits if isinstance(v, BitVector) else int(v) for v in support]
    if not vals:
        raise ValueError("support must be nonempty")
    if len(set(vals)) != len(vals):
        raise ValueError("support contains duplicates")
    probs = np.zeros(1 << n)
    probs[np.asarray(vals)] = 1.0 / len(vals)
    return ExplicitDistribution(n, probs)


def _weight_table(n: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << n, dtype=np.uint64)).astype(np.int64)


def biased_table(n: int, p: float) -> ExplicitDistribution:
    """p-biased product distribution (each bit 1 with probability p)."""
    w = _weight_table(n)
    # log-space keeps n=24 tables accurate for small p
    if p in (0.0, 1.0):
        return point_mass(n, 0 if p == 0.0 else (1 << n) - 1)
    logp = w * math.log(p) + (n - w) * math.log(1.0 - p)
    return ExplicitDistribution(n, np.exp(logp))


def truncation_floor(n: int, p: float) -> float:
    """Weight floor of the truncated biased source (0.9 p n, as a real)."""
    return 0.9 * p * n


def deficient_mass(n: int, p: float) -> float:
    """Probability that a p-biased string weighs strictly less than the floor."""
    floor = truncation_floor(n, p)
    w0 = max(0, math.ceil(floor))
    term = (1.0 - p) ** n
    total = 0.0
    ratio = p / (1.0 - p) if p < 1.0 else math.inf
    for w in range(w0):
        total += term
        term *= ratio * (n - w) / (w + 1)
    return total


def truncated_biased_table(n: int, p: float) -> ExplicitDistribution:
    """Exact table of the truncated biased source.

    A p-biased draw is kept when its weight is at least 0.9 p n (ties kept),
    otherwise replaced by a uniform string; so every cell gains q * 2^-n where
    q is the deficient-weight mass.
    """
    if not 0.0 < p <= 0.5:
        raise ValueError(f"p out of (0, 1/2]: {p}")
    floor = truncation_floor(n, p)
    q = deficient_mass(n, p)
    base = biased_table(n, p).probs.copy()
    base[_weight_table(n) < floor] = 0.0
    return ExplicitDistribution(n, base + q * 2.0 ** -n)


def truncated_biased_max_prob(n: int, p: float) -> float:
    """Closed-form max cell probability of the truncated biased source.

    The maximum sits at the lightest kept weight w0 (the biased body is
    decreasing in weight for p <= 1/2): p^w0 (1-p)^(n-w0) + q 2^-n.
    """
    if not 0.0 < p <= 0.5:
        raise ValueError(f"p out of (0, 1/2]: {p}")
    w0 = max(0, math.ceil(truncation_floor(n, p)))
    body = math.exp(w0 * math.log(p) + (n - w0) * math.log(1.0 - p))
    return body + deficient_mass(n, p) * 2.0 ** -n


def shift_distribution(D: ExplicitDistribution, y: BitVector) -> ExplicitDistribution:
    """Pushforward under XOR with y: P'(a) = P(a xor y)."""
    if y.n != D.n:
        raise ValueError(f"shift length {y.n} != distribution length {D.n}")
    idx = np.arange(1 << D.n) ^ y.bits
    return ExplicitDistribution(D.n, D.probs[idx])


def min_entropy(D: ExplicitDistribution) -> float:
    """-log2 of the largest cell probability, in bits."""
    return -math.log2(float(D.probs.max()))


@dataclass(frozen=True)
class SourceSampler:
    """Seeded sampler of packed n-bit strings.

    Kinds: ``uniform``, ``flat`` (uniform on an explicit support), ``biased``
    (each bit 1 w.p. p), ``truncated_biased`` (biased with sub-floor draws
    replaced by uniform strings), and ``shifted`` (inner sampler XOR a fixed
    mask).
    """

    kind: str
    n: int
    seed: int = 0
    p: float | None = None
    weight_floor: float | None = None
    support: tuple[int, ...] | None = None
    shift: int | None = None
    inner: "SourceSampler | None" = None

    @classmethod
    def uniform(cls, n: int, seed: int) -> "SourceSampler":
        return cls("uniform", n, seed)

    @classmethod
    def biased(cls, n: int, p: float, seed: int) -> "SourceSampler":
        if not 0.0 < p <= 0.5:
            raise ValueError(f"p out of (0, 1/2]: {p}")
        return cls("biased", n, seed, p=p)

    @classmethod
    def truncated_biased(cls, n: int, p: float, seed: int,
                         weight_floor: float | None = None) -> "SourceSampler":
        if not 0.0 < p <= 0.5:
            raise ValueError(f"p out of (0, 1/2]: {p}")
        if weight_floor is None:
            weight_floor = truncation_floor(n, p)
        return cls("truncated_biased", n, seed, p=p, weight_floor=weight_floor)

    @classmethod
    def flat(cls, support, n: int, seed: int) -> "SourceSampler":
        vals = tuple(v.bits if isinstance(v, BitVector) else int(v) for v in support)
        if len(set(vals)) != len(vals):
            raise ValueError("support contains duplicates")
        return cls("flat", n, seed, support=vals)

    @classmethod
    def shifted(cls, inner: "SourceSampler", y: BitVector) -> "SourceSampler":
        if y.n != inner.n:
            raise ValueError("shift length mismatch")
        return cls("shifted", inner.n, inner.seed, shift=y.bits, inner=inner)

    def draw(self, count: int) -> np.ndarray:
        """(count, W) uint64 samples; prefix-stable in count for a fixed seed."""
        if self.kind == "shifted":
            out = self.inner.draw(count)
            shift = kernels.pack_ints([self.shift], self.n)[0]
            return out ^ shift[np.newaxis, :]
        W = kernels.words_needed(self.n)
        out = np.empty((count, W), dtype=np.uint64)
        done = 0
        chunk_idx = 0
        while done < count:
            take = min(_SAMPLE_CHUNK, count - done)
            out[done:done + take] = self._draw_chunk(chunk_idx)[:take]
            done += take
            chunk_idx += 1
        return out

    def _draw_chunk(self, chunk_idx: int) -> np.ndarray:
        rng = generator(self.seed, chunk_idx)
        c = _SAMPLE_CHUNK
        if self.kind == "uniform":
            return kernels.uniform_words(rng, c, self.n)
        if self.kind == "biased":
            return kernels.biased_words(rng, c, self.n, self.p)
        if self.kind == "truncated_biased":
            xw = kernels.biased_words(rng, c, self.n, self.p)
            if self.weight_floor > 0:
                bad = kernels.weights(xw) < self.weight_floor
                nbad = int(bad.sum())
                if nbad:
                    xw[bad] = kernels.uniform_words(rng, nbad, self.n)
            return xw
        if self.kind == "flat":
            table = kernels.pack_ints(self.support, self.n)
            idx = rng.integers(0, len(self.support), size=c)
            return table[idx]
        raise ValueError(f"unknown sampler kind {self.kind!r}")

    def explicit(self) -> ExplicitDistribution:
        """Exact table of the sampled distribution (small n only)."""
        if self.kind == "uniform":
            return uniform_distribution(self.n)
        if self.kind == "biased":
            return biased_table(self.n, self.p)
        if self.kind == "truncated_biased":
            if self.weight_floor != truncation_floor(self.n, self.p):
                raise ValueError("explicit table only for the default floor")
            return truncated_biased_table(self.n, self.p)
        if self.kind == "flat":
            return flat_source(self.support, self.n)
        if self.kind == "shifted":
            return shift_distribution(self.inner.explicit(),
                                      BitVector(self.n, self.shift))
        raise ValueError(f"unknown sampler kind {self.kind!r}")

    def config(self) -> dict:
        """JSON-compatible description {kind, n, p, seed, shift, ...}."""
        out = {"kind": self.kind, "n": self.n, "p": self.p,
               "seed": self.seed, "shift": self.shift}
        if self.weight_floor is not None:
            out["weight_floor"] = self.weight_floor
        if self.support is not None:
            out["support"] = list(self.support)
        if self.inner is not None:
            out["inner"] = self.inner.config()
        return out

    def to_json(self) -> str:
        return json.dumps(self.config(), sort_keys=True)

    @classmethod
    def from_config(cls, cfg: dict) -> "SourceSampler":
        inner = cls.from_config(cfg["inner"]) if cfg.get("inner") else None
        support = tuple(cfg["support"]) if cfg.get("support") is not None else None
        return cls(kind=cfg["kind"], n=cfg["n"], seed=cfg.get("seed", 0),
                   p=cfg.get("p"), weight_floor=cfg.get("weight_floor"),
                   support=support, shift=cfg.get("shift"), inner=inner)
