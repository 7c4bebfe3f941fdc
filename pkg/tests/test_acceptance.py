"""Acceptance suite: one test per headline criterion, printed pass/fail lines.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Every tolerance is fixed here; nothing is calibrated at runtime.
"""

import math
from itertools import combinations

import numpy as np
import pytest

from sparsext import kernels
from sparsext.cli import main as cli_main
from sparsext.families import (ConstructBError, StrongFamilySpec,
                               WeakFamilySpec, bernoulli_matrix, construct_B,
                               sample_strong, sample_weak)
from sparsext.gf2 import Gf2Matrix, rank
from sparsext.lowerbound import (entropy_param_bounds, make_params,
                                 noise_disagreement_bound, sparsity_sweep,
                                 xor_shift_disagreement)
from sparsext.measure import (collision_probability, collision_sd_bound,
                              family_error, flat_source_battery,
                              pairwise_baseline_bound, strong_error_bound,
                              weak_error_bound)
from sparsext.prg import (BlockLayout, accounting, build_blocks, build_G,
                          evaluate_circuit, evaluate_circuit_batch,
                          locality_reduce, random_local_function)
from sparsext.rng import generator
from sparsext.sources import (binary_entropy, entropy_inverse_bounds,
                              flat_source, solve_bias,
                              truncated_biased_max_prob,
                              truncated_biased_table)


def _report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[{criterion}] {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{criterion}: {detail}"


def test_a01_collision_bounds_distance_exactly():
    """100 exact configurations of the collision-to-distance inequality."""
    cfg = generator(1001)
    battery_cycle = 0
    worst = -math.inf
    checked = 0
    while checked < 100:
        n = int(cfg.integers(6, 13))
        m = int(cfg.integers(2, 7))
        if m > n:
            continue
        k = int(cfg.integers(m, min(n, m + 7) + 1))
        p = float(cfg.uniform(0.05, 0.5))
        mats = [bernoulli_matrix(m, n, p, generator(1001, checked, j))
                for j in range(32)]
        battery = flat_source_battery(n, k, 2000 + checked)
        _, D = battery[battery_cycle % 3]
        battery_cycle += 1
        mean_sd = family_error(mats, D).mean_sd
        cp = collision_probability(mats, D).cp
        worst = max(worst, mean_sd - collision_sd_bound(cp, m))
        checked += 1
    _report("A1", worst <= 1e-12,
            f"max(joint SD - collision bound) = {worst:.3e} over 100 configs")


def _strong_setup():
    spec = StrongFamilySpec(n=14, m=4, k=12, delta=2.0 ** -6, K=20.0)
    insts = [sample_strong(spec, (77, i)) for i in range(200)]
    battery = flat_source_battery(14, 12, 77)
    return spec, insts, battery


def test_a02_strong_family_error_bound():
    """200 sampled members vs the closed-form guarantee, three flat sources."""
    spec, insts, battery = _strong_setup()
    bound = strong_error_bound(2.0 ** -6, 12, 4, 20.0)
    assert bound == pytest.approx(0.5 * math.sqrt(2.0 ** -6 + 20 * 2.0 ** -8))
    details = []
    ok = True
    for name, D in battery:
        rep = family_error(insts, D)
        good = rep.mean_sd <= bound + 4 * rep.std_err
        ok = ok and good
        details.append(f"{name}: {rep.mean_sd:.4f} <= {bound:.4f}+4sigma")
    _report("A2", ok, "; ".join(details))


def test_a03_pairwise_baseline():
    """Dense p = 1/2 members stay within the optimal-error baseline."""
    mats = [bernoulli_matrix(4, 14, 0.5, generator(78, i)) for i in range(200)]
    battery = flat_source_battery(14, 12, 77)
    bound = pairwise_baseline_bound(12, 4)
    assert bound == pytest.approx(0.03125)
    ok = True
    details = []
    for name, D in battery:
        rep = family_error(mats, D)
        good = rep.mean_sd <= bound + 4 * rep.std_err
        ok = ok and good
        details.append(f"{name}: {rep.mean_sd:.4f}")
    _report("A3", ok, f"bound {bound}; " + "; ".join(details))


def test_a04_weak_family_error_bound():
    """Seeded family with a verified sparse B meets its tighter guarantee."""
    spec = WeakFamilySpec(n=14, m=6, s=3, k=10, c=2.0, K=20.0, t=2)
    B = construct_B(6, 3, 2, 2, seed=(79, 0))
    insts = [sample_weak(spec, B, (79, 1, i)) for i in range(200)]
    battery = flat_source_battery(14, 10, 79)
    bound = weak_error_bound(2.0, 10, 3, 6)
    assert bound == pytest.approx(0.0625)
    ok = True
    details = []
    for name, D in battery:
        rep = family_error(insts, D)
        good = rep.mean_sd <= bound + 4 * rep.std_err
        ok = ok and good
        details.append(f"{name}: {rep.mean_sd:.4f}")
    _report("A4", ok, f"bound {bound}; " + "; ".join(details))


def _brute_force_b_ok(B: Gf2Matrix, t: int) -> bool:
    if rank(B) != B.cols:
        return False
    for size in range(1, t + 1):
        for subset in combinations(range(B.rows), size):
            acc = 0
            for i in subset:
                acc ^= B.row_masks[i]
            if acc == 0:
                return False
    return True


def test_a05_construct_b_exact_verification():
    """50 seeds per shape, brute-force checked, plus the forced-failure path."""
    shapes = [(6, 3, 2, 2), (8, 5, 2, 2), (10, 6, 3, 3)]
    ok = True
    for m, s, t, w in shapes:
        for seed in range(50):
            B = construct_B(m, s, w, t, seed=(m, s, seed))
            ok = ok and _brute_force_b_ok(B, t)
    failed_as_expected = False
    try:
        construct_B(6, 3, 1, 2, seed=0, max_tries=100)
    except ConstructBError as exc:
        failed_as_expected = "rows sum to zero" in str(exc)
    ok = ok and failed_as_expected
    _report("A5", ok, "150 matrices brute-force verified; "
                      "row_weight=1 failure path raised correctly")


def test_a06_entropy_inverse_sandwich():
    """Closed-form bounds trap p at 1000 grid points, zero violations."""
    violations = 0
    for p in np.linspace(1e-3, 0.5, 1000):
        lower, upper = entropy_inverse_bounds(float(p))
        if not lower <= p <= upper:
            violations += 1
    _report("A6", violations == 0, f"{violations} violations on 1000 points")


def test_a07_truncated_source_min_entropy():
    """Closed-form max probability, checked against an exhaustive table."""
    p24 = solve_bias(2.0 * 4 / 24)
    max24 = truncated_biased_max_prob(24, p24)
    ok24 = max24 <= 2.0 ** -6
    # scaled analog small enough for a full table
    m16 = 2.5
    p16 = solve_bias(2.0 * m16 / 16)
    closed = truncated_biased_max_prob(16, p16)
    table_max = float(truncated_biased_table(16, p16).probs.max())
    ok16 = abs(closed - table_max) <= 1e-15 and closed <= 2.0 ** (-1.5 * m16)
    _report("A7", ok24 and ok16,
            f"n=24: max prob {max24:.3e} <= 2^-6; "
            f"n=16: table max {table_max:.3e} == closed form, <= 2^-3.75")


def test_a08_shift_disagreement_bound():
    """Exact disagreement probability never beats the closed form, 200 functions."""
    rng = generator(1008)
    worst = -math.inf
    for _ in range(200):
        d = int(rng.integers(1, 11))
        f = rng.integers(0, 2, size=1 << d).astype(np.uint8)
        for p in (0.05, 0.11, 0.25):
            excess = xor_shift_disagreement(f, p) - noise_disagreement_bound(d, p)
            worst = max(worst, excess)
    _report("A8", worst <= 1e-12,
            f"max excess over the bound {worst:.3e} across 600 checks")


def test_a09_sparsity_sweep_trend():
    """Advantage decays with row weight; endpoints pinned at w=1 and w=32."""
    rows = sparsity_sweep(64, 8, [1, 2, 4, 8, 16, 32], num_matrices=20,
                          num_y=1, num_x=1 << 20, seed=1009, mode="test")
    advs = [r["advantage"] for r in rows]
    errs = [r["stderr"] for r in rows]
    monotone = all(
        advs[i + 1] <= advs[i] + 4 * math.sqrt(errs[i] ** 2 + errs[i + 1] ** 2)
        for i in range(len(advs) - 1))
    endpoints = advs[0] >= 0.5 and advs[-1] <= 0.1
    detail = " ".join(f"w={r['row_weight']}:{r['advantage']:.3f}" for r in rows)
    _report("A9", monotone and endpoints, detail)


def test_a10_bias_sandwich_grid():
    """Two-sided closed-form bounds on the solved bias across a log grid."""
    violations = 0
    total = 0
    n = 64
    while n <= 4096:
        m = 1
        while m <= n // 6:
            lower, upper = entropy_param_bounds(n, m)
            p = solve_bias(2.0 * m / n)
            total += 1
            if not lower <= p <= upper:
                violations += 1
            m *= 2
        n *= 2
    _report("A10", violations == 0,
            f"{violations} violations over {total} (n, m) pairs")


def test_a11_prg_structural_suite():
    """Window lengths, reconstruction, locality cap, dependency soundness."""
    n, ell, kb, t = 6, 3, 3, 8
    f = random_local_function(n, ell, seed=1011)

    # window length identity for every offset value
    xs1 = [[int(v) for v in generator(1012).integers(0, 1 << n, size=kb)]]
    length_ok = True
    for o in range(1, n + 1):
        layout1 = BlockLayout(1, kb, n, (o,))
        (z,) = build_blocks(f, layout1, xs1)
        length_ok = length_ok and z < (1 << layout1.m_cols)

    layout = BlockLayout.random(t, kb, n, seed=1013)
    spec = WeakFamilySpec(n=t, m=t // 2 + 2, s=2, k=t, c=2.0)
    B = construct_B(spec.m, 2, 1, spec.t, seed=1014)
    insts = [sample_weak(spec, B, (1015, j)) for j in range(layout.m_cols)]
    G = build_G(f, layout, insts)
    red = locality_reduce(G)
    Gp = red.circuit

    locality_ok = Gp.max_locality <= 3 * ell

    # reconstruction identity over 1e4 random inputs (input space >> 2^14)
    rng = generator(1016)
    recon_ok = True
    for _ in range(10_000):
        x = int.from_bytes(rng.bytes((Gp.input_length + 7) // 8), "little")
        x &= (1 << Gp.input_length) - 1
        yG = evaluate_circuit(G, x & ((1 << G.input_length) - 1))
        yGp = evaluate_circuit(Gp, x)
        for gi, group in enumerate(red.groups):
            fold = 0
            for oi in group:
                fold ^= (yGp >> oi) & 1
            if fold != (yG >> gi) & 1:
                recon_ok = False

    # dependency soundness: flip every input against 1000 random contexts
    contexts = rng.integers(0, 2, size=(1000, Gp.input_length)).astype(np.uint8)
    base = evaluate_circuit_batch(Gp, contexts)
    listed = [set(d) for d in Gp.deps]
    deps_ok = True
    for i in range(Gp.input_length):
        flipped = contexts.copy()
        flipped[:, i] ^= 1
        changed = (evaluate_circuit_batch(Gp, flipped) != base).any(axis=0)
        for j in range(Gp.output_length):
            if i in listed[j]:
                deps_ok = deps_ok and bool(changed[j])
            else:
                deps_ok = deps_ok and not bool(changed[j])

    recount = accounting(Gp)
    recount_ok = (recount.total_sparsity == Gp.total_sparsity
                  and recount.max_locality == Gp.max_locality)

    ok = length_ok and locality_ok and recon_ok and deps_ok and recount_ok
    _report("A11", ok,
            f"windows ok={length_ok}, locality {Gp.max_locality} <= {3 * ell}, "
            f"reconstruction ok={recon_ok}, dependencies ok={deps_ok}, "
            f"recount ok={recount_ok}")


ACCEPTANCE_COMMANDS = [
    ["strong-measure", "--n", "14", "--k", "12", "--m", "4", "--delta",
     "0.015625", "--K", "20", "--families", "30", "--seed", "1", "--assert"],
    ["baseline-pairwise", "--n", "14", "--k", "12", "--m", "4", "--families",
     "30", "--seed", "1", "--assert"],
    ["weak-measure", "--n", "14", "--k", "10", "--m", "6", "--s", "3", "--c",
     "2", "--t", "2", "--row-weight", "2", "--families", "30", "--seed", "1",
     "--assert"],
    ["construct-b", "--m", "10", "--s", "6", "--t", "3", "--row-weight", "3",
     "--seed", "1"],
    ["lowerbound-sweep", "--n", "64", "--m", "8", "--weights", "1,8,32",
     "--num-matrices", "2", "--num-y", "1", "--num-x", "16384", "--seed",
     "1", "--mode", "test"],
    ["verify-appendices", "--seed", "1", "--assert"],
    ["prg-build", "--n", "6", "--ell", "3", "--k-blocks", "3", "--t", "8",
     "--s", "2", "--seed", "1", "--reduce-locality"],
]


def test_a12_deterministic_reports(tmp_path):
    """Every acceptance command reproduces its report byte for byte."""
    ok = True
    for idx, argv in enumerate(ACCEPTANCE_COMMANDS):
        a = tmp_path / f"{idx}_a.out"
        b = tmp_path / f"{idx}_b.out"
        code_a = cli_main(argv + ["--out", str(a)])
        code_b = cli_main(argv + ["--out", str(b)])
        ok = ok and code_a == 0 and code_b == 0
        ok = ok and a.read_bytes() == b.read_bytes()
    # prg-eval on the circuit produced by the prg-build run above
    circ = tmp_path / "6_a.out"
    from sparsext.prg import circuit_from_json

    G = circuit_from_json(circ.read_text())
    nbytes = (G.input_length + 7) // 8
    e1 = tmp_path / "eval_a.out"
    e2 = tmp_path / "eval_b.out"
    for out in (e1, e2):
        ok = ok and cli_main(["prg-eval", "--circuit", str(circ), "--input",
                              "a1" * nbytes, "--out", str(out)]) == 0
    ok = ok and e1.read_bytes() == e2.read_bytes()
    _report("A12", ok,
            f"{len(ACCEPTANCE_COMMANDS)} commands + prg-eval byte-identical")
