"""Statistical distance, collision probability, and closed-form error bounds.

Exact mode pushes explicit source tables through sampled family members and
reports per-member statistical distances; for a family treated as uniform
over its sampled members, the joint distance to (member, uniform output)
equals the mean of the per-member distances, so no joint table is built.
Monte-Carlo mode estimates the same quantities from seeded samples with a
conservative error term sqrt(2^m / N) for the plug-in distance estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import kernels
from .families import FamilyInstance
from .gf2 import BudgetExceededError, Gf2Matrix, rank
from .rng import generator
from .sources import ExplicitDistribution, flat_source

__all__ = [
    "CollisionReport",
    "ErrorReport",
    "collision_probability",
    "collision_sd_bound",
    "family_error",
    "flat_source_battery",
    "output_distribution",
    "pairwise_baseline_bound",
    "statistical_distance",
    "strong_error_bound",
    "weak_error_bound",
]

_MAX_OUTPUT_BITS = 20


@dataclass(frozen=True)
class ErrorReport:
    """Mean statistical distance of family outputs from uniform."""

    mean_sd: float
    std_err: float
    per_function_sds: tuple[float, ...]
    family_size: int
    mode: str  # "exact" | "monte_carlo"


@dataclass(frozen=True)
class CollisionReport:
    """Collision probability of two independent draws through one member."""

    cp: float
    mode: str
    samples: int
    std_err: float = 0.0


def statistical_distance(A: ExplicitDistribution, B: ExplicitDistribution) -> float:
    """Half the L1 distance between two explicit tables."""
    if A.n != B.n:
        raise ValueError(f"bit lengths differ: {A.n} vs {B.n}")
    return 0.5 * float(np.abs(A.probs - B.probs).sum())


def _sd_from_uniform(probs: np.ndarray) -> float:
    return 0.5 * float(np.abs(probs - 1.0 / probs.size).sum())


def _instance_parts(h) -> tuple[Gf2Matrix, Gf2Matrix | None]:
    if isinstance(h, Gf2Matrix):
        return h, None
    if isinstance(h, FamilyInstance):
        return h.M, h.B
    raise TypeError(f"expected FamilyInstance or Gf2Matrix, got {type(h)}")


def _pushforward(M: Gf2Matrix, D: ExplicitDistribution) -> np.ndarray:
    support = D.support()
    xw = support.astype(np.uint64)[:, np.newaxis]
    idx = kernels.matvec_indices(kernels.matrix_words(M), xw)
    return np.bincount(idx, weights=D.probs[support], minlength=1 << M.rows)


def _seed_image(B: Gf2Matrix) -> np.ndarray:
    """Distribution of Br over a uniform seed r, as a 2^m table."""
    r_all = np.arange(1 << B.cols, dtype=np.uint64)[:, np.newaxis]
    idx = kernels.matvec_indices(kernels.matrix_words(B), r_all)
    return np.bincount(idx, minlength=1 << B.rows) / float(1 << B.cols)


def output_distribution(h, D: ExplicitDistribution) -> ExplicitDistribution:
    """Exact output table of one member on source D (uniform seed if weak)."""
    M, B = _instance_parts(h)
    if D.n != M.cols:
        raise ValueError(f"source length {D.n} != input length {M.cols}")
    if M.rows > _MAX_OUTPUT_BITS:
        raise BudgetExceededError(f"output table too large: m={M.rows}")
    out = _pushforward(M, D)
    if B is not None:
        if B.cols > _MAX_OUTPUT_BITS:
            raise BudgetExceededError(f"seed space too large: s={B.cols}")
        seed_dist = _seed_image(B)
        cells = np.arange(out.size)
        conv = np.zeros_like(out)
        for u in np.flatnonzero(seed_dist):
            conv[cells ^ u] += seed_dist[u] * out
        out = conv
    return ExplicitDistribution(M.rows, out)


def _mc_output_indices(h, D: ExplicitDistribution, num_samples: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Sampled output cells of one member on source D (fresh uniform seeds)."""
    M, B = _instance_parts(h)
    support = D.support()
    cdf = np.cumsum(D.probs[support])
    cdf[-1] = 1.0
    picks = support[np.searchsorted(cdf, rng.random(num_samples))]
    xw = picks.astype(np.uint64)[:, np.newaxis]
    if B is None:
        return kernels.matvec_indices(kernels.matrix_words(M), xw)
    if M.cols + B.cols > 63:
        raise BudgetExceededError("packed joint input exceeds one word")
    seeds = rng.integers(0, 1 << B.cols, size=num_samples).astype(np.uint64)
    joint = xw[:, 0] | (seeds << np.uint64(M.cols))
    joined = kernels.matrix_words(M.hstack(B))
    return kernels.matvec_indices(joined, joint[:, np.newaxis])


def family_error(instances, D: ExplicitDistribution, mode: str = "exact", *,
                 num_samples: int = 1 << 16, seed: int = 0) -> ErrorReport:
    """Mean over sampled members of the output's distance from uniform.

    Exact mode computes each member's distance from its exact output table.
    Monte-Carlo mode uses a plug-in estimate from ``num_samples`` draws per
    member; the reported ``std_err`` then adds the conservative systematic
    term 0.5 sqrt(2^m / num_samples) on top of the cross-member spread.
    """
    sds = []
    for i, h in enumerate(instances):
        if mode == "exact":
            out = output_distribution(h, D)
            sds.append(_sd_from_uniform(out.probs))
        elif mode == "monte_carlo":
            m = _instance_parts(h)[0].rows
            idx = _mc_output_indices(h, D, num_samples, generator(seed, 0xE0, i))
            freq = np.bincount(idx, minlength=1 << m) / num_samples
            sds.append(_sd_from_uniform(freq))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    sds_arr = np.asarray(sds)
    n_fam = len(sds)
    std_err = float(sds_arr.std(ddof=1) / math.sqrt(n_fam)) if n_fam > 1 else 0.0
    if mode == "monte_carlo":
        m = _instance_parts(instances[0])[0].rows
        std_err += 0.5 * math.sqrt((1 << m) / num_samples)
    return ErrorReport(float(sds_arr.mean()), std_err, tuple(sds), n_fam, mode)


def collision_probability(instances, D: ExplicitDistribution,
                          mode: str = "exact", *, num_samples: int = 1 << 16,
                          seed: int = 0) -> CollisionReport:
    """Pr[H(X, R) = H(X', R')] for i.i.d. X, X' from D and fresh seeds.

    The member is drawn once per collision trial (uniform over the sampled
    list), so the exact value is the mean over members of sum_z q_h(z)^2.
    """
    cps = []
    for i, h in enumerate(instances):
        if mode == "exact":
            q = output_distribution(h, D).probs
            cps.append(float(np.dot(q, q)))
        elif mode == "monte_carlo":
            rng = generator(seed, 0xC0, i)
            a = _mc_output_indices(h, D, num_samples, rng)
            b = _mc_output_indices(h, D, num_samples, rng)
            cps.append(float(np.mean(a == b)))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    cps_arr = np.asarray(cps)
    cp = float(cps_arr.mean())
    n_fam = len(cps)
    if mode == "exact":
        return CollisionReport(cp, mode, 0)
    spread = cps_arr.var(ddof=1) / n_fam if n_fam > 1 else 0.0
    binom = cp * (1.0 - cp) / (n_fam * num_samples)
    return CollisionReport(cp, mode, num_samples * n_fam,
                           float(math.sqrt(spread + binom)))


def collision_sd_bound(cp: float, m: int) -> float:
    """Distance bound from collision probability: 0.5 sqrt(2^m cp - 1)."""
    return 0.5 * math.sqrt(max(2.0 ** m * cp - 1.0, 0.0))


def strong_error_bound(delta: float, k: int, m: int, K: float = 20.0) -> float:
    """Guaranteed error of the strong family: 0.5 sqrt(delta + K 2^(m-k))."""
    return 0.5 * math.sqrt(delta + K * 2.0 ** (m - k))


def weak_error_bound(c: float, k: int, s: int, m: int) -> float:
    """Guaranteed error of the weak family: 0.5 sqrt(c 2^(m-k-s))."""
    if c <= 1.0:
        raise ValueError(f"c must exceed 1: {c}")
    return 0.5 * math.sqrt(c * 2.0 ** (m - k - s))


def pairwise_baseline_bound(k: int, m: int) -> float:
    """Error of the dense p = 1/2 family on min-entropy k: 0.5 2^((m-k)/2)."""
    return 0.5 * 2.0 ** (0.5 * (m - k))


def _low_weight_support(n: int, size: int) -> list[int]:
    out = []
    for w in range(n + 1):
        for ones in combinations(range(n), w):
            v = 0
            for j in ones:
                v |= 1 << j
            out.append(v)
            if len(out) == size:
                return out
    raise ValueError(f"support of {size} exceeds 2^{n}")


def _affine_support(n: int, k: int, rng: np.random.Generator) -> list[int]:
    while True:
        basis = [int(v) for v in rng.integers(1, 1 << n, size=k, dtype=np.uint64)]
        if rank(Gf2Matrix(k, n, tuple(basis))) == k:
            break
    offset = int(rng.integers(0, 1 << n, dtype=np.uint64))
    vals = []
    cur = 0
    for i in range(1 << k):
        if i:
            cur ^= basis[(i & -i).bit_length() - 1]
        vals.append(cur ^ offset)
    return vals


def flat_source_battery(n: int, k: int, seed: int
                        ) -> list[tuple[str, ExplicitDistribution]]:
    """Three flat min-entropy-k sources: random, low-weight, affine subspace."""
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    rng = generator(seed, 0xBA77)
    size = 1 << k
    random_support = rng.choice(1 << n, size=size, replace=False)
    return [
        ("random_flat", flat_source(random_support.tolist(), n)),
        ("low_weight_flat", flat_source(_low_weight_support(n, size), n)),
        ("affine_flat", flat_source(_affine_support(n, k, rng), n)),
    ]
