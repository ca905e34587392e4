"""Acceptance criteria 1-9, one printed PASS/FAIL line each.

Run under pytest (the lines are repeated in the terminal summary) or
directly with ``python tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from permlab.asymptotics import SweepRow, predict_ratio, verify_sweep
from permlab.errors import DegenerateSpectrumError
from permlab.fluctuations import (
    adjugate_constant_c,
    covariance_K,
    spectrum_pairing_check,
    verify_lemma_identity,
)
from permlab.kernel import (
    KernelSpec,
    bridge_potentials,
    conjecture_trend,
    fredholm_determinant,
    fredholm_refinement,
)
from permlab.linalg import adjugate
from permlab.permanent import build_block_matrix, permanent_naive, permanent_ryser
from permlab.scaling import PositiveBlockMatrix, ScalingSolution, sinkhorn_scale
from permlab.tables import block_permanent_ratio, example2_exact_ratio

RESULTS = {}


def report(k, passed, detail, elapsed):
    line = f"criterion {k}: {'PASS' if passed else 'FAIL'}  ({elapsed:.1f}s)  {detail}"
    RESULTS[k] = line
    print(line)
    return passed


def rel_diff(log_a, log_b):
    """Relative difference of ``exp(log_a)`` and ``exp(log_b)``."""
    if log_a == log_b:
        return 0.0
    return abs(math.expm1(log_a - log_b))


def example2(delta):
    return 0.5 * np.array([[1 + delta, 1 - delta], [1 - delta, 1 + delta]])


# --- computations, parametrised by worker count where criterion 9 needs it ---

def oracle_block_values(workers):
    out = {}
    for m in (1, 2, 3):
        b = np.random.default_rng(100 + m).uniform(0.2, 2.0, size=(m, m))
        for n in range(1, 10 // m + 1):
            out[(m, n)] = (b, block_permanent_ratio(b, n, workers=workers).log_ratio)
    return out


def oracle_ryser_values(workers):
    rng = np.random.default_rng(8)
    mats = [rng.uniform(0.05, 1.0, size=(8, 8)) for _ in range(50)]
    return mats, [permanent_ryser(a, workers=workers) for a in mats]


EXAMPLE2_NS = (10, 100, 1000, 10_000)


def example2_block_sums(workers):
    return [block_permanent_ratio(example2(0.5), n, workers=workers).log_ratio for n in EXAMPLE2_NS]


def sweep_m3(workers):
    b = np.random.default_rng(6).uniform(0.2, 3.0, size=(3, 3))
    return verify_sweep(b, [25, 50, 100], workers=workers)


# --- criteria ---

def criterion_1():
    t0 = time.perf_counter()
    worst_block = 0.0
    for (m, n), (b, log_ratio) in oracle_block_values(1).items():
        naive = permanent_naive(build_block_matrix(b, n).entries)
        worst_block = max(worst_block, rel_diff(log_ratio + math.lgamma(m * n + 1), naive))
    mats, ryser = oracle_ryser_values(1)
    worst_ryser = max(rel_diff(r, permanent_naive(a)) for a, r in zip(mats, ryser))
    elapsed = time.perf_counter() - t0
    ok = worst_block <= 1e-10 and worst_ryser <= 1e-10 and elapsed < 60
    return report(1, ok, f"oracle equivalence: block vs naive max rel {worst_block:.2e}, "
                         f"ryser vs naive max rel {worst_ryser:.2e} (tol 1e-10)", elapsed)


def criterion_2():
    t0 = time.perf_counter()
    worst_exact = worst_pred = 0.0
    for m in range(1, 5):
        b = PositiveBlockMatrix.example1(m)
        for n in range(1, 6):
            target = -m * n * math.log(m)
            worst_exact = max(worst_exact, abs(block_permanent_ratio(b, n).log_ratio - target))
            worst_pred = max(worst_pred, abs(predict_ratio(b, n).log_predicted_ratio - target))
    elapsed = time.perf_counter() - t0
    ok = worst_exact <= 1e-10 and worst_pred <= 1e-10
    return report(2, ok, f"uniform seed: exact max abs {worst_exact:.2e}, "
                         f"prediction max abs {worst_pred:.2e} (tol 1e-10)", elapsed)


def criterion_3():
    t0 = time.perf_counter()
    rows = [SweepRow.build(n, example2_exact_ratio(0.5, n),
                           -2 * n * math.log(2) - 0.5 * math.log(0.75)) for n in EXAMPLE2_NS]
    err = [r.scaled_error for r in rows]
    scaled = [r.sqrt_n_times_error for r in rows]
    decreasing = all(a > b for a, b in zip(err, err[1:]))
    bounded = max(scaled[1:]) <= 10 * scaled[1]
    elapsed = time.perf_counter() - t0
    ok = decreasing and err[-1] <= 0.01 and bounded and elapsed < 60
    return report(3, ok, "two-block delta=0.5: scaled errors "
                         + ", ".join(f"{e:.3e}" for e in err)
                         + f"; sqrt(n)*err max/at100 = {max(scaled[1:]) / scaled[1]:.2f}", elapsed)


def criterion_4():
    t0 = time.perf_counter()
    eye = np.eye(2)
    worst = 0.0
    for n in range(1, 21):
        target = -math.log(math.comb(2 * n, n))
        worst = max(worst, rel_diff(block_permanent_ratio(eye, n).log_ratio, target),
                    rel_diff(example2_exact_ratio(1.0, n), target))
    gaps = [abs(example2_exact_ratio(1.0, n) - (-2 * n * math.log(2) + 0.5 * math.log(math.pi * n)))
            for n in (50, 100, 200)]
    shrinking = gaps[0] > gaps[1] > gaps[2]
    sol = ScalingSolution.from_vectors(eye, [1.0, 1.0], [1.0, 1.0])
    try:
        predict_ratio(eye, 50, sol)
        signalled = False
    except DegenerateSpectrumError:
        signalled = True
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and shrinking and gaps[-1] < 1e-3 and signalled
    return report(4, ok, f"degenerate delta=1: 1/binom max rel {worst:.2e}; gaps "
                         + ", ".join(f"{g:.2e}" for g in gaps)
                         + f"; degenerate signalled = {signalled}", elapsed)


def criterion_5():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    lemma_worst = spec_worst = adj_worst = 0.0
    ok = True
    for i in range(100):
        m = 2 + i % 5
        t = sinkhorn_scale(rng.uniform(0.1, 5.0, size=(m, m))).t
        lem = verify_lemma_identity(t, tol=1e-9)
        spec = spectrum_pairing_check(t, tol=1e-8)
        ok &= lem.passed and spec.passed
        lemma_worst = max(lemma_worst, lem.max_rel_error)
        spec_worst = max(spec_worst, spec.max_rel_error)
        if m <= 4:
            c = adjugate_constant_c(t)
            dev = float(np.max(np.abs(adjugate(covariance_K(t)) - c)))
            adj_worst = max(adj_worst, dev / max(abs(c), 1e-300))
    ok &= adj_worst <= 1e-8
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    return report(5, ok, f"100 random seeds m=2..6: identities max rel {lemma_worst:.2e} (1e-9), "
                         f"spectrum max {spec_worst:.2e} (1e-8), adjugate max rel {adj_worst:.2e} (1e-8)",
                  elapsed)


def criterion_6():
    t0 = time.perf_counter()
    err = sweep_m3(1).column("scaled_error")
    elapsed = time.perf_counter() - t0
    ok = err[2] < err[0] and err[2] <= 0.1 and elapsed < 300
    return report(6, ok, "m=3 random seed: scaled errors at n=25,50,100 = "
                         + ", ".join(f"{e:.3e}" for e in err), elapsed)


def criterion_7():
    t0 = time.perf_counter()
    det_worst = lam_worst = 0.0
    for delta in (0.25, 0.5, 0.9):
        b = example2(delta)
        for n in (2, 5, 10):
            sol = bridge_potentials(KernelSpec.block(b), 2 * n)
            det_worst = max(det_worst, abs(fredholm_determinant(sol) - (1 - delta**2)))
            leading = predict_ratio(b, n).log_leading / (2 * n)
            lam_worst = max(lam_worst, abs(sol.lambda_rate - leading))
    elapsed = time.perf_counter() - t0
    ok = det_worst <= 1e-10 and lam_worst <= 1e-10
    return report(7, ok, f"block kernel at N=2n: |D - (1-delta^2)| max {det_worst:.2e}, "
                         f"|lambda - leading/N| max {lam_worst:.2e} (tol 1e-10)", elapsed)


def criterion_8():
    t0 = time.perf_counter()
    spec = KernelSpec.cosine(0.1)
    rep = conjecture_trend(spec, [8, 16, 24])
    # ratio * sqrt(D) - 1 with the lattice rate is exactly the report's scaled error
    err = rep.column("scaled_error")
    nonincreasing = all(b <= a for a, b in zip(err, err[1:]))
    (_, d128), (_, d256), (_, d512) = fredholm_refinement(spec, [128, 256, 512])
    first_order = abs(d128 - d256) <= 5 * abs(d256 - d512) + 1e-8
    elapsed = time.perf_counter() - t0
    ok = nonincreasing and first_order and elapsed < 600
    return report(8, ok, "cosine eps=0.1: |ratio*sqrt(D)-1| at n=8,16,24 = "
                         + ", ".join(f"{e:.3e}" for e in err)
                         + f"; refinement diffs {abs(d128 - d256):.1e}, {abs(d256 - d512):.1e}", elapsed)


def criterion_9():
    t0 = time.perf_counter()
    worst = 0.0
    one, four = oracle_block_values(1), oracle_block_values(4)
    worst = max(worst, max(rel_diff(one[k][1], four[k][1]) for k in one))
    worst = max(worst, max(rel_diff(a, b) for a, b in zip(oracle_ryser_values(1)[1],
                                                           oracle_ryser_values(4)[1])))
    ex1, ex4 = example2_block_sums(1), example2_block_sums(4)
    worst = max(worst, max(rel_diff(a, b) for a, b in zip(ex1, ex4)))
    # the block sum must also reproduce the closed two-block formula
    closed = max(rel_diff(a, example2_exact_ratio(0.5, n)) for a, n in zip(ex1, EXAMPLE2_NS))
    s1, s4 = sweep_m3(1), sweep_m3(4)
    worst = max(worst, max(rel_diff(a, b) for a, b in zip(s1.column("log_exact_ratio"),
                                                          s4.column("log_exact_ratio"))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and closed <= 1e-10
    return report(9, ok, f"workers 1 vs 4 on criteria 1, 3, 6: max rel {worst:.2e}; "
                         f"block sum vs closed form {closed:.2e} (tol 1e-10)", elapsed)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(criterion):
    assert criterion()


if __name__ == "__main__":
    outcomes = [c() for c in CRITERIA]
    raise SystemExit(0 if all(outcomes) else 1)
