"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`.  The n = 3 criteria share
one seeded MCMC campaign (fixture `n3`): statistics on many regions are
evaluated from a single enumeration per lattice, which is statistically
equivalent to separate runs and keeps the suite inside its time budget.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from latstats.harness import (
    ExperimentSpec,
    effective_samples,
    fit_line,
    mean_with_error,
    proportion_with_error,
    run_experiment,
)
from latstats.lattice import UnimodularLattice, enumerate_nonzero_in_radius
from latstats.linalg import int_det, smith_normal_form
from latstats.regions import ball_of_volume, box
from latstats.rogers import (
    beta_coefficient,
    moment_polynomial,
    phi,
    q_polynomial,
    theta,
    zeta,
)
from latstats.sampler import ChainConfig, autocorrelation, single_chain
from latstats.siegel import evaluate_statistic

from oracles import (
    brute_force_coefficients_in_radius,
    has_unimodular_completion,
    minor_gcd_divisors,
)

CONF = 3.0
BATCHES = 16


def _report(num, text):
    print(f"\nACCEPTANCE {num} PASS: {text}")


def _random_lattice(rng, n):
    while True:
        M = rng.normal(size=(n, n))
        d = np.linalg.det(M)
        if abs(d) > 0.3:
            B = M / abs(d) ** (1.0 / n)
            if d < 0:
                B[:, 0] = -B[:, 0]
            return UnimodularLattice(B)


# ---------------------------------------------------------------- criterion 1


def test_criterion_01_exact_oracle_suite():
    start = time.time()
    rng = np.random.default_rng(101)

    # Smith form: divisor chain, determinant product, minor-gcd equivalence
    for i in range(1000):
        m = int(rng.integers(1, 6))
        n = int(rng.integers(1, 7))
        M = rng.integers(-20, 21, size=(m, n)).tolist()
        divisors, U, V = smith_normal_form(M)
        for a, b in zip(divisors, divisors[1:]):
            assert b % a == 0
        if m == n:
            d = abs(int_det(M))
            if d != 0:
                assert math.prod(divisors) == d
        if m <= 3 and n <= 4:
            small = [[max(-9, min(9, x)) for x in row] for row in M]
            assert smith_normal_form(small)[0] == minor_gcd_divisors(small)

    # enumeration against the exhaustive coefficient box
    for i in range(100):
        n = int(rng.integers(2, 5))
        lat = _random_lattice(rng, n)
        R = float(rng.uniform(0.8, 3.0))
        got = {p.c for p in enumerate_nonzero_in_radius(lat, R)}
        assert got == brute_force_coefficients_in_radius(lat.basis, R)

    # primitive tuples against the exhaustive basis-completion search
    from latstats.lattice import is_primitive_tuple

    checked = 0
    for _ in range(400):
        n = int(rng.integers(2, 4))
        k = int(rng.integers(1, min(n, 2) + 1))
        if n == 3 and k == 1 and checked % 10 != 0:
            continue  # the two-row completion search is the heavy case
        rows = rng.integers(-3, 4, size=(k, n))
        if any(not np.any(r) for r in rows):
            continue
        lat = UnimodularLattice.standard(n)
        pts = [lat.point(r) for r in rows]
        assert is_primitive_tuple(lat, pts) == has_unimodular_completion(
            rows.tolist(), n, entry_bound=6
        )
        checked += 1
    assert checked >= 200

    elapsed = time.time() - start
    assert elapsed < 120.0
    _report(1, f"exact oracle suite clean in {elapsed:.1f}s "
               "(1000 Smith instances, 100 enumerations, tuple completion sweep)")


# ---------------------------------------------------------------- criterion 2


def test_criterion_02_siegel_mean_exact_n2():
    start = time.time()
    sampler = ChainConfig(n=2, chain_count=4, samples_per_chain=5000, seed=202)
    e1 = run_experiment(ExperimentSpec(
        experiment="E1", n=2, regions=[ball_of_volume(2, 20.0)],
        sampler=sampler, confidence=CONF))
    e2 = run_experiment(ExperimentSpec(
        experiment="E2", n=2, regions=[ball_of_volume(2, 5.0), ball_of_volume(2, 20.0)],
        sampler=sampler, confidence=CONF))
    (r1,) = e1
    assert r1.samples == 20_000
    assert abs(r1.estimate - 20.0) <= CONF * r1.stderr and r1.passed
    r20 = next(r for r in e2 if r.t == 20.0)
    assert r20.theory == pytest.approx(120.0 / math.pi**2, rel=1e-9)
    assert abs(r20.estimate - r20.theory) <= CONF * r20.stderr and r20.passed
    r5 = next(r for r in e2 if r.t == 5.0)
    assert r5.passed  # exact-sampler validation at t = 5 as well
    elapsed = time.time() - start
    assert elapsed < 60.0
    _report(2, f"n=2 exact sampler: count {r1.estimate:.3f} ~ 20, primitive "
               f"{r20.estimate:.3f} ~ {r20.theory:.4f} over 2e4 samples in {elapsed:.0f}s")


# --------------------------------------------------------- shared n=3 campaign


N3_REGIONS = {
    "B5": ball_of_volume(3, 5.0),
    "B10": ball_of_volume(3, 10.0),
    "B20": ball_of_volume(3, 20.0),
    "B40": ball_of_volume(3, 40.0),
    "B80": ball_of_volume(3, 80.0),
    "box10": box((-2.5, -1.0, -0.5), (2.5, 1.0, 0.5)),
}


@pytest.fixture(scope="module")
def n3():
    """Per-chain series of every n=3 statistic the criteria need."""
    cfg = ChainConfig(n=3, step_sigma=0.5, burn_in=5000, thinning=10,
                      chain_count=4, samples_per_chain=6000, seed=20240811)
    plan = [("siegel", "B5"), ("siegel", "B10")] + [
        ("siegel_pr", key) for key in N3_REGIONS
    ]
    radius = max(r.bounding_radius for r in N3_REGIONS.values())
    start = time.time()
    series = {key: [] for key in plan}
    for chain in range(cfg.chain_count):
        acc = {key: np.empty(cfg.samples_per_chain) for key in plan}
        for i, lat in enumerate(single_chain(cfg, chain)):
            pts = enumerate_nonzero_in_radius(lat, radius)
            for name, reg in plan:
                acc[(name, reg)][i] = evaluate_statistic(
                    name, N3_REGIONS[reg], lat, points=pts)
        for key in plan:
            series[key].append(acc[key])
    series["elapsed"] = time.time() - start
    series["config"] = cfg
    return series


def test_criterion_03_siegel_means_mcmc_n3(n3):
    total = 24_000
    mean, se = mean_with_error(n3[("siegel", "B10")], BATCHES, iid=False)
    assert abs(mean - 10.0) <= CONF * se
    mean_pr, se_pr = mean_with_error(n3[("siegel_pr", "B10")], BATCHES, iid=False)
    th = 10.0 / zeta(3.0)
    assert th == pytest.approx(8.3191, abs=5e-4)
    assert abs(mean_pr - th) <= CONF * se_pr
    neff = effective_samples(n3[("siegel", "B10")], BATCHES)
    assert neff >= 10_000
    pooled = np.concatenate(n3[("siegel", "B10")])
    assert abs(autocorrelation(pooled, 1)) < 0.2
    # split-half stationarity: first and second halves of every chain agree
    halves_a = [arr[: arr.size // 2] for arr in n3[("siegel", "B10")]]
    halves_b = [arr[arr.size // 2 :] for arr in n3[("siegel", "B10")]]
    ma, sa = mean_with_error(halves_a, BATCHES, iid=False)
    mb, sb = mean_with_error(halves_b, BATCHES, iid=False)
    assert abs(ma - mb) <= CONF * math.hypot(sa, sb)
    assert n3["elapsed"] < 300.0
    _report(3, f"n=3 MCMC: count {mean:.3f} ~ 10 (se {se:.3f}), primitive "
               f"{mean_pr:.3f} ~ {th:.4f} (se {se_pr:.3f}), "
               f"{neff:.0f} effective samples, campaign {n3['elapsed']:.0f}s")


def test_criterion_04_independent_tuples_n4():
    start = time.time()
    spec = ExperimentSpec(
        experiment="E3", n=4, regions=[ball_of_volume(4, 5.0)], k=2,
        sampler=ChainConfig(n=4, burn_in=5000, thinning=10, chain_count=4,
                            samples_per_chain=4000, seed=404),
        confidence=CONF, batches=BATCHES)
    records = run_experiment(spec)
    rec = next(r for r in records if r.statistic == "tilde_k_pr:2")
    assert rec.theory == pytest.approx(25.0 / zeta(4.0) ** 2, rel=1e-9)
    assert rec.theory == pytest.approx(21.34, abs=5e-3)
    assert abs(rec.estimate - rec.theory) <= CONF * rec.stderr and rec.passed
    plain = next(r for r in records if r.statistic == "tilde_k:2")
    assert plain.passed  # non-primitive variant holds too
    elapsed = time.time() - start
    assert elapsed < 600.0
    _report(4, f"n=4 independent pairs on B_5: {rec.estimate:.3f} ~ "
               f"{rec.theory:.4f} (se {rec.stderr:.3f}) in {elapsed:.0f}s")


def test_criterion_05_primitive_pairs_n5():
    start = time.time()
    spec = ExperimentSpec(
        experiment="E4", n=5, regions=[ball_of_volume(5, 4.0)], k=2,
        sampler=ChainConfig(n=5, burn_in=4000, thinning=8, chain_count=4,
                            samples_per_chain=2500, seed=505),
        confidence=CONF, batches=BATCHES)
    records = run_experiment(spec)
    rec = next(r for r in records if r.statistic == "pr_tuples:2")
    assert rec.theory == pytest.approx(theta(5, 2) * 16.0, rel=1e-9)
    assert rec.theory == pytest.approx(14.26, abs=5e-3)
    assert abs(rec.estimate - rec.theory) <= CONF * rec.stderr and rec.passed
    elapsed = time.time() - start
    assert elapsed < 600.0
    _report(5, f"n=5 primitive pairs on B_4: {rec.estimate:.3f} ~ "
               f"{rec.theory:.4f} (se {rec.stderr:.3f}) in {elapsed:.0f}s")


def test_criterion_06_variance_growth_n3(n3):
    ts, variances = [], []
    for key in ("B5", "B10", "B20", "B40"):
        pooled = np.concatenate(n3[("siegel_pr", key)])
        ts.append(N3_REGIONS[key].volume)
        variances.append(float(pooled.var(ddof=1)))
    slope, _, _ = fit_line([math.log(t) for t in ts],
                           [math.log(v) for v in variances],
                           [1.0] * len(ts))
    assert 0.8 <= slope <= 1.2
    _report(6, f"Var of primitive count on B_t, t in {ts}: {np.round(variances, 2)}, "
               f"log-log slope {slope:.3f} in [0.8, 1.2]")


def test_criterion_07_moment_polynomial_crosscheck(n3):
    beta = beta_coefficient(3, 2, 1, s_max=50, d_max=50)
    predicted = 25.0 + 5.0 * beta.value
    counts_sq = [arr**2 for arr in n3[("siegel", "B5")]]
    mc, se = mean_with_error(counts_sq, BATCHES, iid=False)
    tolerance = CONF * se + 5.0 * beta.truncation_bound
    assert beta.rigorous
    assert abs(mc - predicted) <= tolerance
    _report(7, f"second moment of count on B_5: MC {mc:.3f} vs series "
               f"{predicted:.3f} (tolerance {tolerance:.3f}, "
               f"rigorous tail {beta.truncation_bound:.4f})")


def test_criterion_08_beta_lower_bounds():
    b32 = beta_coefficient(3, 2, 1, s_max=50, d_max=50)
    b42 = beta_coefficient(4, 2, 1, s_max=50, d_max=50)
    b43 = beta_coefficient(4, 3, 2, s_max=6, d_max=6, mc_samples=20_000,
                           rng=np.random.default_rng(808))
    for name, b in (("(3,2)", b32), ("(4,2)", b42), ("(4,3)", b43)):
        assert b.value >= 1.0 - b.error, name
    _report(8, f"leading lower-order coefficients: (3,2) {b32.value:.3f}, "
               f"(4,2) {b42.value:.3f}, (4,3) {b43.value:.3f} +- {b43.error:.3f}, "
               "all >= 1 within reported error")


def test_criterion_09_box_moment_bound(n3):
    P = moment_polynomial(3, 2, s_max=50, d_max=50)
    Q = q_polynomial(3, 2, P)
    bound = Q.evaluate(10.0)
    sq = [arr**2 for arr in n3[("siegel_pr", "box10")]]
    mc, se = mean_with_error(sq, BATCHES, iid=False)
    assert mc <= bound + CONF * se
    _report(9, f"second moment of primitive count on a volume-10 box: "
               f"{mc:.3f} <= bound {bound:.3f} (se {se:.3f})")


def test_criterion_10_tail_decay_n3(n3):
    z95 = 1.645
    ts, ps, ses = [], [], []
    for key in ("B10", "B20", "B40", "B80"):
        events = [(arr <= 2.0).astype(float) for arr in n3[("siegel_pr", key)]]
        p, se, neff = proportion_with_error(events, BATCHES, iid=False, z=CONF)
        ts.append(N3_REGIONS[key].volume)
        ps.append((p * neff + 0.5) / (neff + 1.0))  # smoothed for the log fit
        ses.append(se)
    slope, slope_se, intercept = fit_line(
        [math.log(t) for t in ts], [math.log(p) for p in ps],
        [se / p for se, p in zip(ses, ps)])
    assert slope <= -0.8
    scaled = [p * t for p, t in zip(ps, ts)]
    scaled_se = [se * t for se, t in zip(ses, ts)]
    tslope, tse, _ = fit_line([math.log(t) for t in ts], scaled, scaled_se)
    assert tslope <= z95 * tse  # no statistically significant increase
    constant = math.exp(intercept)
    _report(10, f"P[at most 2 primitive points in B_t] ~ {constant:.2f}/t: "
                f"log-log slope {slope:.3f} <= -0.8, scaled trend slope "
                f"{tslope:.3f} <= {z95:.3f}*{tse:.3f}")


def test_criterion_11_span_probability_lower_bound(n3):
    P = moment_polynomial(3, 2, s_max=50, d_max=50)
    Q = q_polynomial(3, 2, P)
    reports = []
    for key in ("B5", "B20"):
        t = N3_REGIONS[key].volume
        events = [(arr > 0.0).astype(float) for arr in n3[("siegel_pr", key)]]
        p_theta, se, _ = proportion_with_error(events, BATCHES, iid=False, z=CONF)
        bound = phi(3, t, Q)
        assert p_theta >= bound - CONF * se, key
        reports.append(f"t={t:g}: {p_theta:.4f} >= {bound:.4f} - {CONF * se:.4f}")
    _report(11, "span probability dominates the polynomial profile: " + "; ".join(reports))


def test_criterion_12_determinism_via_cli(tmp_path):
    cfg = tmp_path / "exp.toml"
    cfg.write_text(
        """
[experiment]
id = "E2"
n = 2

[[experiment.regions]]
kind = "ball_by_volume"
n = 2
t = 5.0

[experiment.sampler]
chain_count = 8
samples_per_chain = 250
seed = 1212
"""
    )

    def run(tag, threads):
        prefix = tmp_path / tag
        res = subprocess.run(
            [sys.executable, "-m", "latstats.cli", "experiment",
             "--config", str(cfg), "--out", str(prefix), "--threads", str(threads)],
            capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        return (prefix.with_suffix(".csv").read_bytes(),
                prefix.with_suffix(".json").read_bytes())

    a = run("t1a", 1)
    b = run("t1b", 1)
    c = run("t8a", 8)
    d = run("t8b", 8)
    assert a == b == c == d
    _report(12, "experiment reruns byte-identical across runs and at 1 vs 8 threads")
