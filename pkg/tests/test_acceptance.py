"""Acceptance gate: one test (and one summary line) per criterion.

Monte Carlo bands are ``3 * sqrt(p (1 - p) / R)`` around the reference
value ``p``, widened by half a unit in the last reported digit when the
reference is rounded (``0.005`` for two-decimal values).
"""

from __future__ import annotations

import json

import numpy as np
import pytest

from rankinfer._rng import max_workers
from rankinfer.cli import main as cli_main
from rankinfer.derivatives import second_derivative_analytic, second_derivative_numerical
from rankinfer.rank_tests import VecCovariance, kp_statistic, rs_statistic
from rankinfer.simlab import (
    OMEGA_1,
    OMEGA_2,
    Design,
    EstimatorSpec,
    MethodSpec,
    emit,
    gen_gaussian_direct,
    rank_distribution,
    run_monte_carlo,
)
from rankinfer.spectral import MatrixEstimate, partition, phi_r, singular_values, svd
from rankinfer.tuning import KappaRule

pytestmark = pytest.mark.slow

R_DEFAULT = 2000
B_DEFAULT = 500
WORKERS = max_workers(None)
K = KappaRule.parse


def band(p: float, R: int, rounding: float = 0.0) -> float:
    return 3.0 * np.sqrt(p * (1.0 - p) / R) + rounding


def within(value: float, target: float, tol: float) -> bool:
    return abs(value - target) <= tol


def fmt_checks(checks) -> str:
    return "; ".join(f"{name}={val:.4f} (ref {ref}, tol {tol:.4f})" for name, val, ref, tol, _ in checks)


def orthonormal(rng, p, q):
    u, _ = np.linalg.qr(rng.standard_normal((p, q)))
    return u


def test_criterion_01_algebraic_oracles(acceptance):
    rng = np.random.default_rng(101)
    failures = []
    for _ in range(50):
        k = int(rng.integers(2, 6))
        m = int(rng.integers(k, 7))
        r = int(rng.integers(0, k))
        pi = rng.standard_normal((m, k))
        phi = phi_r(pi, r)
        q2 = svd(pi).right_vectors[:, r:]
        if abs(np.sum((pi @ q2) ** 2) - phi) > 1e-10 * max(phi, 1):
            failures.append("min-repr-equality")
        for _ in range(200):
            u = orthonormal(rng, k, k - r)
            if np.sum((pi @ u) ** 2) < phi - 1e-10:
                failures.append("min-repr-bound")
        c = float(rng.uniform(0, 5))
        if abs(phi_r(c * pi, r) - c**2 * phi) > 1e-10 * max(c**2 * phi, 1e-300):
            failures.append("homogeneity")
        n = int(rng.integers(10, 10_000))
        if abs(rs_statistic(MatrixEstimate.from_mean(pi, n), r) - n * phi) > 1e-12 * n * max(phi, 1e-300):
            failures.append("rs-identity")
        M = rng.standard_normal((m, k))
        _, p2, _, q2b = partition(svd(pi), r)
        base = singular_values(p2.T @ M @ q2b)
        rot = singular_values((p2 @ orthonormal(rng, m - r, m - r)).T @ M @ (q2b @ orthonormal(rng, k - r, k - r)))
        if np.max(np.abs(rot - base), initial=0.0) > 1e-9:
            failures.append("rotation")
    for _ in range(200):
        a, b = rng.standard_normal((2, 5, 4))
        if np.any(np.abs(singular_values(a) - singular_values(b)) > np.linalg.norm(a - b) + 1e-12):
            failures.append("weyl")
    ok = not failures
    acceptance(ok, "min-representation bound, homogeneity, Weyl x200, RS identity, rotation invariance"
               + ("" if ok else f" failed: {sorted(set(failures))}"))
    assert ok


def test_criterion_02_nonbilinear_counterexample(acceptance):
    k, r, r0 = 3, 2, 1
    _, p2, _, q2 = partition(svd(np.diag([1.0, 0.0, 0.0])), r0)
    m1 = p2 @ np.eye(2) @ q2.T
    m2 = p2 @ np.diag([-1.0, 1.0]) @ q2.T
    vals = [second_derivative_analytic(p2, q2, M, r, r0) for M in (m1, m2, m1 + m2, m1 - m2)]
    lhs = vals[0] + vals[1]
    rhs = (vals[2] + vals[3]) / 2
    ok = (
        np.allclose(vals, [1, 1, 0, 0], atol=1e-12)
        and np.isclose(lhs, 2 * (k - r))
        and np.isclose(rhs, 2 * (k - r) - 2)
        and not np.isclose(lhs, rhs)
    )
    acceptance(ok, f"phi'' values {np.round(vals, 12).tolist()}, sum {lhs:g} vs polarized {rhs:g}")
    assert ok


def test_criterion_03_derivative_agreement(acceptance):
    rng = np.random.default_rng(303)
    kappas = np.logspace(-2, -4, 5)
    slopes = []
    for _ in range(50):
        k = int(rng.integers(2, 6))
        m = int(rng.integers(k, 7))
        r0 = int(rng.integers(1, k))
        r = int(rng.integers(r0, k))
        pi = rng.standard_normal((m, r0)) @ rng.standard_normal((r0, k))
        M = rng.standard_normal((m, k))
        _, p2, _, q2 = partition(svd(pi), r0)
        target = second_derivative_analytic(p2, q2, M, r, r0)
        errs = [abs(second_derivative_numerical(pi, M, kap, r) - target) for kap in kappas]
        slopes.append(np.polyfit(np.log(kappas), np.log(errs), 1)[0])
    slopes = np.array(slopes)
    ok = bool(np.all(np.abs(slopes - 1.0) <= 0.2))
    acceptance(ok, f"log-log slopes over 50 instances in [{slopes.min():.3f}, {slopes.max():.3f}] (target 1.0 +/- 0.2)")
    assert ok


def test_criterion_04_kp_null_quantiles(acceptance):
    n, R = 1000, 5000
    rng_seeds = {1: 4401, 2: 4402}
    q = {}
    for wid, omega in ((1, OMEGA_1), (2, OMEGA_2)):
        om = VecCovariance.known(omega)
        stats_ = np.empty(R)
        for i in range(R):
            z = gen_gaussian_direct(omega, 0.0, n, seed=rng_seeds[wid] * 100_000 + i)
            stats_[i] = kp_statistic(MatrixEstimate.from_mean(z.mean(axis=0), n), om, 1)
        q[wid] = float(np.quantile(stats_, 0.95))
    from scipy import stats

    chi = float(stats.chi2.ppf(0.95, 1))
    checks = [
        ("q95(Omega1)", q[1], 1.67, 0.15, within(q[1], 1.67, 0.15)),
        ("q95(Omega2)", q[2], 5.49, 0.35, within(q[2], 5.49, 0.35)),
        ("chi2(1)", chi, 3.84, 0.005, within(chi, 3.84, 0.005)),
    ]
    ok = all(c[-1] for c in checks)
    acceptance(ok, fmt_checks(checks))
    assert ok


def test_criterion_05_gaussian_direct_nulls(acceptance):
    R, B = R_DEFAULT, 1000
    methods = [
        MethodSpec("cf-a", K("n^-1/4")),
        MethodSpec("cf-n", K("n^-1/4")),
        MethodSpec("cf-t", beta_ratio=0.1),
        MethodSpec("kp"),
        MethodSpec("kp-m"),
    ]
    refs = {"cf-a": 0.0514, "cf-n": 0.0482, "cf-t": 0.0444, "kp": 0.0050, "kp-m": 0.0046}
    tab = run_monte_carlo(Design("gaussian_direct", 1000, 0.0, omega_id=1), methods, 1, R=R, B=B,
                          seed=505, workers=WORKERS)
    checks = []
    for row in tab.rows:
        p = refs[row.method]
        tol = band(p, R)
        checks.append((row.method, row.rate, p, tol, within(row.rate, p, tol)))
    ok = all(c[-1] for c in checks)
    acceptance(ok, fmt_checks(checks))
    assert ok


def test_criterion_06_table1_spot_checks(acceptance):
    R = R_DEFAULT
    half = 0.005
    cells = [
        (2, 0.0, 1000, [(MethodSpec("cf-t", beta_ratio=0.1), 0.04), (MethodSpec("cf-a", K("n^-1/4")), 0.05),
                        (MethodSpec("kp-m"), 0.05)]),
        (3, 0.0, 1000, [(MethodSpec("cf-t", beta_ratio=0.1), 0.05), (MethodSpec("cf-a", K("n^-1/4")), 0.06),
                        (MethodSpec("cf-n", K("n^-1/3")), 0.05), (MethodSpec("kp-m"), 0.00)]),
        (3, 0.5, 300, [(MethodSpec("cf-t", beta_ratio=0.1), 1.00), (MethodSpec("cf-a", K("n^-1/4")), 1.00),
                       (MethodSpec("cf-n", K("n^-1/3")), 1.00), (MethodSpec("kp-m"), 1.00)]),
    ]
    checks = []
    for i, (r, delta, n, specs) in enumerate(cells):
        tab = run_monte_carlo(Design("hetero_ma", n, delta), [s for s, _ in specs], r, R=R, B=B_DEFAULT,
                              seed=600 + i, workers=WORKERS)
        for row, (_, p) in zip(tab.rows, specs):
            tol = band(p, R, half)
            checks.append((f"r={r},d={delta},n={n},{row.method}", row.rate, p, tol, within(row.rate, p, tol)))
    ok = all(c[-1] for c in checks)
    acceptance(ok, fmt_checks(checks))
    assert ok


def test_criterion_07_threshold_and_sequential_selection(acceptance):
    R = R_DEFAULT
    checks = []
    for d in range(2, 7):
        hist = rank_distribution(Design("motivation", 1000, 0.0, d=d), EstimatorSpec("threshold", K("n^-1/4")),
                                 R=R, seed=700 + d, workers=WORKERS)
        p = hist.counts[6 - d] / R
        checks.append((f"thr n^-1/4 d={d}", p, ">=0.985", 0.0, p >= 0.985))
    hist = rank_distribution(Design("motivation", 1000, 0.0, d=6), EstimatorSpec("threshold", K("n^-2/5")),
                             R=R, seed=710, workers=WORKERS)
    p = hist.counts[0] / R
    checks.append(("thr n^-2/5 d=6", p, "<=0.02", 0.0, p <= 0.02))
    hist = rank_distribution(Design("motivation", 1000, 0.0, d=2), EstimatorSpec("kp", alpha=0.005),
                             R=R, seed=720, workers=WORKERS)
    p = hist.counts[4] / R
    checks.append(("seq-KP beta=alpha/10 d=2", p, 0.9947, 0.01, within(p, 0.9947, 0.01)))
    ok = all(c[-1] for c in checks)
    acceptance(ok, fmt_checks(checks))
    assert ok


def test_criterion_08_rank_estimation_distributions(acceptance):
    R = R_DEFAULT
    refs = [("cf-a", 1, 89.20), ("cf-a", 5, 70.30), ("cf-a", 6, 60.44), ("kp", 5, 12.46), ("kp", 6, 5.46)]
    checks = []
    for name, d, ref in refs:
        spec = EstimatorSpec("cf-a", K("n^-1/4"), alpha=0.05) if name == "cf-a" else EstimatorSpec("kp", alpha=0.05)
        hist = rank_distribution(Design("motivation", 1000, 0.1, d=d), spec, R=R, seed=800 + d, B=B_DEFAULT,
                                 workers=WORKERS)
        pct = hist.percentages[6]
        checks.append((f"{name} d={d} P(r=6)%", pct, ref, 2.5, within(pct, ref, 2.5)))
    ok = all(c[-1] for c in checks)
    acceptance(ok, fmt_checks(checks))
    assert ok


def test_criterion_09_sequential_kp_coverage(acceptance):
    R = R_DEFAULT
    design = Design.linear(np.diag([1.0, 1.0, 0.0, 0.0]), 1000)
    hist = rank_distribution(design, EstimatorSpec("kp", alpha=0.05), R=R, seed=909, workers=WORKERS)
    p_eq = hist.counts[2] / R
    p_lo = sum(hist.counts[:2]) / R
    checks = [
        ("P(r=r0)", p_eq, 0.95, 0.02, within(p_eq, 0.95, 0.02)),
        ("P(r<r0)", p_lo, "<=0.005", 0.0, p_lo <= 0.005),
    ]
    ok = all(c[-1] for c in checks)
    acceptance(ok, fmt_checks(checks))
    assert ok


def test_criterion_10_determinism(acceptance, tmp_path):
    design = Design("hetero_ma", 150)
    methods = [MethodSpec("cf-t", beta_ratio=0.1), MethodSpec("cf-a", K("n^-1/4")), MethodSpec("kp-m")]
    tables = [emit(run_monte_carlo(design, methods, 2, R=24, B=96, seed=1010, workers=w)) for w in (1, 4, 8)]
    rng = np.random.default_rng(10)
    V = rng.standard_normal((300, 3))
    Z = V @ np.diag([1.0, 0.5, 0.0]) + rng.standard_normal((300, 3))
    data = tmp_path / "d.csv"
    with open(data, "w") as fh:
        fh.write("a,b,c,x,y,z\n")
        for row in np.hstack([V, Z]):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    docs = []
    for w in (1, 4, 8):
        out = tmp_path / f"o{w}.json"
        code = cli_main(["--input", str(data), "--v", "a,b,c", "--z", "x,y,z", "--seed", "42", "--workers", str(w),
                         "--B", "257", "--output", str(out)])
        assert code == 0
        docs.append(out.read_bytes())
    json.loads(docs[0])
    ok = len(set(tables)) == 1 and len(set(docs)) == 1
    acceptance(ok, f"RejectionTable identical across 1/4/8 workers: {len(set(tables)) == 1}; "
               f"CLI document identical across 1/4/8 threads: {len(set(docs)) == 1}")
    assert ok
