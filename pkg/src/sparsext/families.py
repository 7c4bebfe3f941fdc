"""Samplers and constructors for the two extractor families.

The strong family applies a random sparse matrix M to the source: H(x) = Mx.
The weak family adds a seeded term through a fixed full-column-rank matrix B
whose small row subsets are linearly independent: H(x, r) = Mx + Br.  B is
found by rejection sampling over fixed-row-weight sparse matrices with exact
verification, in the spirit of low-density parity-check constructions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .gf2 import (BitVector, Exceeds, Gf2Matrix, matvec, matvec_add,
                  min_weight_left_kernel, rank, read_matrix, write_matrix)
from .rng import generator

__all__ = [
    "ConstructBError",
    "FamilyInstance",
    "StrongFamilySpec",
    "WeakFamilySpec",
    "bernoulli_matrix",
    "check_b",
    "construct_B",
    "evaluate",
    "fixed_row_weight_matrix",
    "load_instance",
    "sample_strong",
    "sample_weak",
    "save_instance",
    "strong_bias",
    "strong_bias_tight",
    "weak_bias",
]


class ConstructBError(RuntimeError):
    """Rejection sampling for B exhausted its tries."""


def strong_bias(n: int, m: int, delta: float, K: float = 20.0) -> float:
    """Entry probability for the strong family.

    p = min{(1/m) log2(m/delta) ln(K n / m), 1/2}.  The first log is base 2,
    the second natural.
    """
    if not (1 <= m <= n):
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta out of (0, 1): {delta}")
    if K <= 0:
        raise ValueError(f"K must be positive: {K}")
    if K * n <= m:
        raise ValueError(f"K n / m must exceed 1 for a positive density "
                         f"(K={K}, n={n}, m={m})")
    raw = (1.0 / m) * math.log2(m / delta) * math.log(K * n / m)
    return min(raw, 0.5)


def strong_bias_tight(n: int, m: int, k: int, delta: float, K: float = 20.0) -> float:
    """Sharper entry probability, valid when m <= k / (2 log2(m/delta)).

    p = min{(1/k) log2(m/delta) ln(K n / k), 1/2}.
    """
    if m > k / (2.0 * math.log2(m / delta)):
        raise ValueError(
            f"tight bias needs m <= k/(2 log2(m/delta)); m={m}, k={k}, delta={delta}")
    if K * n <= k:
        raise ValueError(f"K n / k must exceed 1 for a positive density "
                         f"(K={K}, n={n}, k={k})")
    raw = (1.0 / k) * math.log2(m / delta) * math.log(K * n / k)
    return min(raw, 0.5)


def weak_bias(n: int, m: int, c: float, K: float = 20.0) -> float:
    """Entry probability for the weak family: min{(K/m) ln(n / ln c), 1/2}."""
    if c <= 1.0:
        raise ValueError(f"c must exceed 1: {c}")
    if n <= math.log(c):
        raise ValueError(f"n must exceed ln(c): n={n}, c={c}")
    if K <= 0:
        raise ValueError(f"K must be positive: {K}")
    raw = (K / m) * math.log(n / math.log(c))
    return min(raw, 0.5)


@dataclass(frozen=True)
class StrongFamilySpec:
    """Parameters of the strong family; p is derived from them."""

    n: int
    m: int
    k: int
    delta: float
    K: float = 20.0
    tight: bool = False

    def __post_init__(self):
        if not (1 <= self.m <= self.k <= self.n):
            raise ValueError(
                f"need 1 <= m <= k <= n, got m={self.m}, k={self.k}, n={self.n}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta out of (0, 1): {self.delta}")
        self.p  # validates the tight-mode precondition eagerly

    @property
    def p(self) -> float:
        if self.tight:
            return strong_bias_tight(self.n, self.m, self.k, self.delta, self.K)
        return strong_bias(self.n, self.m, self.delta, self.K)


@dataclass(frozen=True)
class WeakFamilySpec:
    """Parameters of the weak family; p derived, t defaults to floor(m/2K)."""

    n: int
    m: int
    s: int
    k: int
    c: float
    K: float = 20.0
    t: int | None = None

    def __post_init__(self):
        if not 1 <= self.s < self.m:
            raise ValueError(f"need 1 <= s < m, got s={self.s}, m={self.m}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        if self.t is None:
            object.__setattr__(self, "t", int(self.m / (2.0 * self.K)))
        if not 0 <= self.t < self.m:
            raise ValueError(f"row-independence parameter out of range: t={self.t}")
        self.p

    @property
    def p(self) -> float:
        return weak_bias(self.n, self.m, self.c, self.K)


@dataclass(frozen=True)
class FamilyInstance:
    """A sampled family member: M for strong, (M, B) for weak."""

    kind: str  # "strong" | "weak"
    spec: StrongFamilySpec | WeakFamilySpec
    M: Gf2Matrix
    B: Gf2Matrix | None
    seed: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("strong", "weak"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.M.rows != self.spec.m or self.M.cols != self.spec.n:
            raise ValueError("M shape does not match spec")
        if self.kind == "weak":
            if self.B is None:
                raise ValueError("weak instance needs B")
            if self.B.rows != self.spec.m or self.B.cols != self.spec.s:
                raise ValueError("B shape does not match spec")
        elif self.B is not None:
            raise ValueError("strong instance must not carry B")


def _as_path(seed) -> tuple[int, ...]:
    return tuple(seed) if isinstance(seed, tuple) else (int(seed),)


def bernoulli_matrix(m: int, n: int, p: float, rng: np.random.Generator) -> Gf2Matrix:
    """m x n matrix with i.i.d. Bernoulli(p) entries."""
    bits = rng.random((m, n)) < p
    masks = []
    for row in bits:
        mask = 0
        for j in np.flatnonzero(row):
            mask |= 1 << int(j)
        masks.append(mask)
    return Gf2Matrix(m, n, tuple(masks))


def fixed_row_weight_matrix(m: int, n: int, w: int,
                            rng: np.random.Generator) -> Gf2Matrix:
    """m x n matrix whose rows each have exactly w ones at uniform positions."""
    if not 0 <= w <= n:
        raise ValueError(f"row weight {w} out of [0, {n}]")
    masks = []
    for _ in range(m):
        mask = 0
        for j in rng.choice(n, size=w, replace=False):
            mask |= 1 << int(j)
        masks.append(mask)
    return Gf2Matrix(m, n, tuple(masks))


def sample_strong(spec: StrongFamilySpec, seed) -> FamilyInstance:
    """Draw M with i.i.d. Bernoulli(p) entries; deterministic in the seed."""
    path = _as_path(seed)
    M = bernoulli_matrix(spec.m, spec.n, spec.p, generator(*path))
    return FamilyInstance("strong", spec, M, None, path)


def check_b(B: Gf2Matrix, t: int) -> str | None:
    """Exact verification of B; returns the first violated condition or None.

    Conditions, in order: full column rank, then no nonempty set of at most
    t rows summing to zero (vacuous for t = 0).
    """
    r = rank(B)
    if r < B.cols:
        return f"rank {r} < {B.cols} (not full column rank)"
    if t >= 1:
        verdict = min_weight_left_kernel(B, t)
        if not isinstance(verdict, Exceeds):
            return f"{verdict} rows sum to zero (threshold t={t})"
    return None


def _sparse_rows(m: int, s: int, target: int,
                 rng: np.random.Generator) -> Gf2Matrix:
    """Random rows of weight target or target - 1 (uniform support choice).

    A constant even row weight would trap every row in the even-weight
    subspace of GF(2)^s (dimension s - 1), making full column rank
    unreachable; mixing in weight target - 1 keeps the total at most
    m * target while restoring odd-weight directions.
    """
    masks = []
    for _ in range(m):
        w = target if target == 1 else int(rng.integers(target - 1, target + 1))
        mask = 0
        for j in rng.choice(s, size=w, replace=False):
            mask |= 1 << int(j)
        masks.append(mask)
    return Gf2Matrix(m, s, tuple(masks))


def construct_B(m: int, s: int, row_weight_target: int, t: int, seed,
                max_tries: int = 2000) -> Gf2Matrix:
    """Find an m x s matrix of full column rank with t-wise independent rows.

    Rejection-samples sparse matrices (per-row weight ``row_weight_target``
    or one less, so total ones <= m * row_weight_target) and returns the
    first that passes the exact checks in :func:`check_b`.  Raises
    :class:`ConstructBError` naming the first violated condition of the last
    attempt when ``max_tries`` is exhausted (the caller may raise
    ``row_weight_target``).
    """
    if not s < m:
        raise ValueError(f"need s < m, got s={s}, m={m}")
    if not t < m:
        raise ValueError(f"need t < m, got t={t}, m={m}")
    if not 1 <= row_weight_target <= s:
        raise ValueError(f"row weight target {row_weight_target} out of [1, {s}]")
    path = _as_path(seed)
    last_reason = "no attempt made"
    for attempt in range(max_tries):
        B = _sparse_rows(m, s, row_weight_target, generator(*path, attempt))
        reason = check_b(B, t)
        if reason is None:
            return B
        last_reason = reason
    raise ConstructBError(
        f"no valid B in {max_tries} tries for m={m}, s={s}, "
        f"row_weight={row_weight_target}, t={t}; last failure: {last_reason}")


def sample_weak(spec: WeakFamilySpec, B: Gf2Matrix, seed) -> FamilyInstance:
    """Draw M i.i.d. Bernoulli(p) and bundle it with a verified B."""
    if B.rows != spec.m or B.cols != spec.s:
        raise ValueError(f"B is {B.rows}x{B.cols}, spec wants {spec.m}x{spec.s}")
    reason = check_b(B, spec.t)
    if reason is not None:
        raise ValueError(f"invalid B: {reason}")
    path = _as_path(seed)
    M = bernoulli_matrix(spec.m, spec.n, spec.p, generator(*path))
    return FamilyInstance("weak", spec, M, B, path)


def evaluate(inst: FamilyInstance, x: BitVector,
             r: BitVector | None = None) -> BitVector:
    """Apply the sampled member: Mx for strong, Mx + Br for weak."""
    if inst.kind == "strong":
        if r is not None:
            raise ValueError("strong instance takes no seed argument")
        return matvec(inst.M, x)
    if r is None:
        raise ValueError("weak instance needs a seed argument")
    return matvec_add(inst.M, x, inst.B, r)


def save_instance(fp: TextIO, inst: FamilyInstance) -> None:
    """One JSON header line, a blank line, then matrix blocks (M, then B)."""
    spec = inst.spec
    header = {
        "kind": inst.kind,
        "n": spec.n,
        "m": spec.m,
        "s": spec.s if inst.kind == "weak" else None,
        "p": spec.p,
        "K": spec.K,
        "c": spec.c if inst.kind == "weak" else None,
        "delta": spec.delta if inst.kind == "strong" else None,
        "t": spec.t if inst.kind == "weak" else None,
        "k": spec.k,
        "seed": list(inst.seed),
    }
    fp.write(json.dumps(header, sort_keys=True) + "\n\n")
    write_matrix(fp, inst.M)
    if inst.B is not None:
        write_matrix(fp, inst.B)


def load_instance(fp: TextIO) -> FamilyInstance:
    header = json.loads(fp.readline())
    kind = header["kind"]
    if kind == "strong":
        spec = StrongFamilySpec(n=header["n"], m=header["m"], k=header["k"],
                                delta=header["delta"], K=header["K"])
        M = read_matrix(fp)
        inst = FamilyInstance("strong", spec, M, None, tuple(header["seed"]))
    elif kind == "weak":
        spec = WeakFamilySpec(n=header["n"], m=header["m"], s=header["s"],
                              k=header["k"], c=header["c"], K=header["K"],
                              t=header["t"])
        M = read_matrix(fp)
        B = read_matrix(fp)
        inst = FamilyInstance("weak", spec, M, B, tuple(header["seed"]))
    else:
        raise ValueError(f"unknown family kind {kind!r}")
    if abs(header["p"] - inst.spec.p) > 1e-12:
        raise ValueError("stored p disagrees with the spec parameters")
    return inst
