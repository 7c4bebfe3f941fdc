"""Adversary machinery showing sparse linear maps fail on shifted biased sources.

The source is the p-biased distribution with H(p) = 2m/n (optionally truncated
at weight 0.9 p n and re-randomized below), shifted by a uniform offset y.
Inputs split into heavy columns (participating in many outputs) and light
ones; the statistical test accepts outputs close in Hamming distance to some
completion of the heavy coordinates.  Sweeps measure distinguishing advantage
against random matrices of fixed row weight as sparsity grows.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .families import fixed_row_weight_matrix
from .gf2 import BitVector, BudgetExceededError, Gf2Matrix, matvec
from .rng import generator, philox
from .sources import binary_entropy, solve_bias, truncation_floor

__all__ = [
    "AdversaryParams",
    "Partition",
    "SWEEP_COLUMNS",
    "distinguishing_advantage",
    "empirical_sd_error_bound",
    "entropy_param_bounds",
    "heavy_light_partition",
    "make_params",
    "membership_table",
    "noise_disagreement_bound",
    "output_bias",
    "sparsity_sweep",
    "test_membership",
    "xor_shift_disagreement",
]

_MAX_HEAVY = 20
_MAX_TABLE_M = 16

SWEEP_COLUMNS = ("n", "m", "row_weight", "sparsity", "p", "beta", "mode",
                 "advantage", "stderr")


@dataclass(frozen=True)
class AdversaryParams:
    """Derived adversary parameters for an n-input, m-output linear map."""

    n: int
    m: int
    beta: float
    p: float
    heavy_threshold: float
    distance_radius: float


@dataclass(frozen=True)
class Partition:
    heavy: tuple[int, ...]
    light: tuple[int, ...]


def entropy_param_bounds(n: int, m: int) -> tuple[float, float]:
    """Sandwich on the bias p solving H(p) = 2m/n.

    Returns (m / (3 n log2(n/m)), 2m / (n log2(n/2m))); the upper value is
    +inf when m = n/2 exactly.
    """
    if not 1 <= m <= n // 2:
        raise ValueError(f"need 1 <= m <= n/2, got m={m}, n={n}")
    lower = m / (3.0 * n * math.log2(n / m))
    upper = math.inf if 2 * m == n else 2.0 * m / (n * math.log2(n / (2.0 * m)))
    return lower, upper


def make_params(n: int, m: int, beta: float = 0.08) -> AdversaryParams:
    """Solve for the bias and derive the partition threshold and test radius.

    The asymptotic argument wants m <= n/6; larger m (up to n/2) is allowed
    for small-scale experiments with a warning.
    """
    if not 0.0 < beta < 0.1:
        raise ValueError(f"beta out of (0, 0.1): {beta}")
    if not 1 <= m <= n // 2:
        raise ValueError(f"need 1 <= m <= n/2, got m={m}, n={n}")
    if m > n // 6:
        warnings.warn(f"m={m} exceeds n/6={n // 6}; asymptotic guarantees "
                      "do not apply at this scale", stacklevel=2)
    p = solve_bias(2.0 * m / n)
    lower, upper = entropy_param_bounds(n, m)
    if not lower <= p <= upper:
        raise AssertionError(
            f"bias sandwich violated: {lower} <= {p} <= {upper}")
    return AdversaryParams(
        n=n, m=m, beta=beta, p=p,
        heavy_threshold=m ** (2.0 - 6.0 * beta) / (p * n),
        distance_radius=0.5 - m ** (-beta) / 4.0,
    )


def heavy_light_partition(M: Gf2Matrix, params: AdversaryParams) -> Partition:
    """Split inputs by participation count (column weight) at the threshold."""
    heavy, light = [], []
    for j in range(M.cols):
        w = M.column_mask(j).bit_count()
        (heavy if w >= params.heavy_threshold else light).append(j)
    return Partition(tuple(heavy), tuple(light))


def _candidate_outputs(y: BitVector, M: Gf2Matrix, part: Partition) -> list[int]:
    """Outputs h(x0, y_light) over all heavy assignments x0 (Gray order)."""
    if len(part.heavy) > _MAX_HEAVY:
        raise BudgetExceededError(
            f"heavy set of {len(part.heavy)} inputs exceeds the enumeration "
            f"cap {_MAX_HEAVY}")
    light_mask = 0
    for j in part.light:
        light_mask |= 1 << j
    base = matvec(M, BitVector(M.cols, y.bits & light_mask)).bits
    effects = [M.column_mask(j) for j in part.heavy]
    outs = [base]
    cur = base
    for i in range(1, 1 << len(part.heavy)):
        cur ^= effects[(i & -i).bit_length() - 1]
        outs.append(cur)
    return outs


def test_membership(z: BitVector, y: BitVector, M: Gf2Matrix,
                    part: Partition, params: AdversaryParams) -> bool:
    """Whether z lies within the distance radius of some heavy completion."""
    if z.n != M.rows or y.n != M.cols:
        raise ValueError("operand lengths do not match the matrix")
    max_dist = int(params.distance_radius * M.rows)
    for cand in _candidate_outputs(y, M, part):
        if (cand ^ z.bits).bit_count() <= max_dist:
            return True
    return False


def membership_table(y: BitVector, M: Gf2Matrix, part: Partition,
                     params: AdversaryParams) -> np.ndarray:
    """Boolean table of the test over all 2^m outputs (m <= 16)."""
    m = M.rows
    if m > _MAX_TABLE_M:
        raise BudgetExceededError(f"membership table too large: m={m}")
    max_dist = int(params.distance_radius * m)
    cells = np.arange(1 << m, dtype=np.uint64)
    ball = cells[np.bitwise_count(cells) <= max_dist].astype(np.int64)
    table = np.zeros(1 << m, dtype=bool)
    for cand in set(_candidate_outputs(y, M, part)):
        table[ball ^ cand] = True
    return table


def output_bias(row_weight: int, p: float) -> float:
    """Bias of the XOR of row_weight independent p-biased bits: (1-2p)^w."""
    return (1.0 - 2.0 * p) ** row_weight


def noise_disagreement_bound(d: int, p: float) -> float:
    """Upper bound 1/2 - (1/2)(1-2p)^d on Pr[f(X+Y) != f(Y)] for d-input f."""
    return 0.5 - 0.5 * (1.0 - 2.0 * p) ** d


def xor_shift_disagreement(f_table: np.ndarray, p: float) -> float:
    """Exact Pr[f(X+Y) != f(Y)], Y uniform, X p-biased, by weight-grouped sums."""
    size = f_table.size
    d = size.bit_length() - 1
    if 1 << d != size:
        raise ValueError("truth table length must be a power of two")
    f = np.asarray(f_table, dtype=np.uint8)
    cells = np.arange(size)
    diff_by_weight = np.zeros(d + 1)
    for x in range(size):
        diff_by_weight[x.bit_count()] += float(np.mean(f[cells ^ x] != f))
    w = np.arange(d + 1)
    return float(np.sum(p ** w * (1.0 - p) ** (d - w) * diff_by_weight))


def empirical_sd_error_bound(m: int, num_samples: int) -> float:
    """Conservative error of the plug-in distance estimate over 2^m cells."""
    return math.sqrt(2.0 ** m / num_samples)


def _sample_histogram(M: Gf2Matrix, params: AdversaryParams, y_bits: int,
                      num_x: int, seed_path: tuple[int, ...],
                      truncate: bool) -> np.ndarray:
    rows = kernels.matrix_words(M)
    shift = kernels.pack_ints([y_bits], M.cols)[0]
    floor = truncation_floor(params.n, params.p) if truncate else None
    return kernels.biased_shift_histogram(
        rows, M.cols, params.p, shift, num_x, philox(*seed_path), floor)


def distinguishing_advantage(M: Gf2Matrix, params: AdversaryParams,
                             num_y: int, num_x: int, seed,
                             mode: str = "empirical",
                             truncate: bool = False) -> float:
    """Mean over random shifts y of the map's distance from uniform.

    ``empirical`` mode reports the plug-in statistical distance of the
    sampled output histogram (error at most
    :func:`empirical_sd_error_bound`).  ``test`` mode reports the advantage
    of the Hamming-ball membership test, Pr[h(X+y) in T_y] - Pr[U in T_y],
    which lower-bounds the distance up to sampling error.
    """
    if M.rows > _MAX_TABLE_M:
        raise BudgetExceededError(f"output histogram too large: m={M.rows}")
    path = tuple(seed) if isinstance(seed, tuple) else (int(seed),)
    part = heavy_light_partition(M, params) if mode == "test" else None
    u = 1.0 / (1 << M.rows)
    vals = []
    for yi in range(num_y):
        y_bits = _random_bits(generator(*path, yi, 0), M.cols)
        counts = _sample_histogram(M, params, y_bits, num_x, (*path, yi, 1), truncate)
        freq = counts / num_x
        if mode == "empirical":
            vals.append(0.5 * float(np.abs(freq - u).sum()))
        elif mode == "test":
            table = membership_table(BitVector(M.cols, y_bits), M, part, params)
            p_real = float(freq[table].sum())
            p_unif = float(table.mean())
            vals.append(p_real - p_unif)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return float(np.mean(vals))


def _random_bits(rng: np.random.Generator, n: int) -> int:
    words = kernels.uniform_words(rng, 1, n)
    return kernels.unpack_ints(words)[0]


def _sweep_task(args) -> float:
    n, m, beta, w, seed_path, num_y, num_x, mode, truncate = args
    params = make_params(n, m, beta)
    M = fixed_row_weight_matrix(m, n, w, generator(*seed_path, 0))
    return distinguishing_advantage(M, params, num_y, num_x,
                                    (*seed_path, 1), mode, truncate)


def sparsity_sweep(n: int, m: int, row_weights, num_matrices: int,
                   num_y: int, num_x: int, seed: int, beta: float = 0.08,
                   mode: str = "empirical", truncate: bool = False,
                   workers: int = 1) -> list[dict]:
    """Advantage versus row weight for random fixed-row-weight matrices.

    Returns one row per weight with the mean advantage over ``num_matrices``
    matrices and the cross-matrix standard error; ``sparsity`` is the exact
    total m * w.  Results are independent of ``workers``.
    """
    params = make_params(n, m, beta)  # validate once, surface warnings early
    weights = list(row_weights)
    tasks = [(n, m, beta, w, (int(seed), wi, mi), num_y, num_x, mode, truncate)
             for wi, w in enumerate(weights) for mi in range(num_matrices)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_task, tasks, chunksize=1))
    else:
        results = [_sweep_task(t) for t in tasks]
    rows = []
    for wi, w in enumerate(weights):
        advs = np.asarray(results[wi * num_matrices:(wi + 1) * num_matrices])
        stderr = float(advs.std(ddof=1) / math.sqrt(num_matrices)) \
            if num_matrices > 1 else 0.0
        rows.append({
            "n": n, "m": m, "row_weight": w, "sparsity": m * w,
            "p": params.p, "beta": beta, "mode": mode,
            "advantage": float(advs.mean()), "stderr": stderr,
        })
    return rows
