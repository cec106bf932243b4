import math

import numpy as np
import pytest

from latstats import errors
from latstats.regions import unit_ball_volume
from latstats.rogers import (
    MomentPolynomial,
    ball_integral_mc,
    ball_integral_r1,
    beta_coefficient,
    d_matrices,
    moment_polynomial,
    omega,
    partitions,
    phi,
    q_polynomial,
    theta,
    zeta,
)

ZETA3 = 1.2020569031595943  # Apery's constant
ZETA5 = 1.0369277551433699


def test_zeta_examples():
    assert zeta(2.0, 1e-9) == pytest.approx(math.pi**2 / 6, abs=1e-9)
    assert zeta(3.0, 1e-9) == pytest.approx(ZETA3, abs=1e-9)
    assert zeta(4.0, 1e-9) == pytest.approx(math.pi**4 / 90, abs=1e-9)
    assert zeta(1.5, 1e-10) == pytest.approx(2.6123753486854883, abs=1e-9)


def test_zeta_domain():
    with pytest.raises(errors.DomainError):
        zeta(1.0)
    with pytest.raises(errors.DomainError):
        zeta(0.5)


def test_theta_examples():
    assert theta(3, 1) == pytest.approx(1 / ZETA3, abs=1e-9)
    assert theta(5, 2) == pytest.approx(1 / (ZETA5 * math.pi**4 / 90), abs=1e-9)
    for n in range(2, 7):
        for k in range(1, n):
            assert 0.0 < theta(n, k) < 1.0
    with pytest.raises(errors.BadOrder):
        theta(3, 3)


def test_partitions_examples():
    p21 = partitions(2, 1)
    assert [(p.nu, p.mu) for p in p21] == [((1,), (2,)), ((2,), (1,))]
    assert len(partitions(4, 2)) == 6
    p31 = partitions(3, 1)
    assert [(p.nu, p.mu) for p in p31] == [((1,), (2, 3)), ((2,), (1, 3)), ((3,), (1, 2))]
    for k in range(2, 7):
        for r in range(1, k):
            assert len(partitions(k, r)) == math.comb(k, r)
    with pytest.raises(errors.BadOrder):
        partitions(3, 3)


def test_d_matrices_examples():
    part12 = partitions(2, 1)[0]  # nu=(1,), mu=(2,)
    terms = d_matrices(2, 1, 1, part12, max_entry=2, n=3)
    assert sorted(t.matrix for t in terms) == [
        ((1, -2),), ((1, -1),), ((1, 1),), ((1, 2),)
    ]
    part21 = partitions(2, 1)[1]  # nu=(2,), mu=(1,): column 1 is forced zero
    for s in (1, 2, 3):
        assert d_matrices(2, 1, s, part21, max_entry=4, n=3) == []
    terms = d_matrices(2, 1, 2, part12, max_entry=1, n=3)
    assert sorted(t.matrix for t in terms) == [((2, -1),), ((2, 1),)]


def _validate_term(term, k, r, s, partition, allow_zero_columns):
    """Independent check of the four admissibility conditions."""
    D = term.matrix
    assert len(D) == r and all(len(row) == k for row in D)
    if not allow_zero_columns:
        for j in range(k):
            assert any(D[i][j] != 0 for i in range(r))
    g = math.gcd(*(abs(x) for row in D for x in row))
    assert math.gcd(g, s) == 1
    for i in range(r):
        for jdx, col in enumerate(partition.nu):
            assert D[i][col - 1] == (s if i == jdx else 0)
    for i in range(r):
        for col in partition.mu:
            if col < partition.nu[i]:
                assert D[i][col - 1] == 0


def test_d_matrices_terms_valid_and_divisor_structure():
    for k, r in ((2, 1), (3, 1), (3, 2), (4, 2)):
        for part in partitions(k, r):
            for s in (1, 2, 3):
                for term in d_matrices(k, r, s, part, max_entry=2, n=4):
                    _validate_term(term, k, r, s, part, False)
                    assert len(term.divisors) == r
                    for e, eps in zip(term.e_factors, term.divisors):
                        assert s % e == 0
                        assert eps % e == 0
                    expected_weight = (math.prod(term.e_factors) / s**r) ** 4
                    assert term.weight == pytest.approx(expected_weight)


def test_ball_integral_r1_examples():
    assert ball_integral_r1([1, 1], 1, 3) == pytest.approx(1.0)
    assert ball_integral_r1([1, 2], 1, 3) == pytest.approx(1.0 / 8.0)
    assert ball_integral_r1([2, 1], 2, 3) == pytest.approx(1.0)
    with pytest.raises(errors.InvalidTerm):
        ball_integral_r1([1, 0], 1, 3)


def test_ball_integral_mc_trivial_and_deterministic():
    val, se = ball_integral_mc([[1, 0], [0, 1]], 1, 3, 1000, np.random.default_rng(0))
    assert (val, se) == (1.0, 0.0)
    a = ball_integral_mc([[1, 0, 1], [0, 1, 1]], 1, 3, 5000, np.random.default_rng(4))
    b = ball_integral_mc([[1, 0, 1], [0, 1, 1]], 1, 3, 5000, np.random.default_rng(4))
    assert a == b


def test_ball_integral_mc_agrees_with_r1_closed_form():
    # 50 independent 3-se checks are expected to break once or twice by
    # chance; demand 48 inside 3 se and everything inside 4.5 se
    rng = np.random.default_rng(71)
    checked = 0
    inside = 0
    while checked < 50:
        k = int(rng.integers(2, 4))
        s = int(rng.integers(1, 4))
        row = [s] + [int(x) for x in rng.integers(-4, 5, size=k - 1)]
        if any(d == 0 for d in row):
            continue
        exact = ball_integral_r1([row], s, 3)
        val, se = ball_integral_mc([row], s, 3, 20_000, np.random.default_rng(checked))
        dev = abs(val - exact)
        assert dev <= 4.5 * max(se, 1e-3), (row, s)
        if dev <= 3 * max(se, 1e-3):
            inside += 1
        checked += 1
    assert inside >= 48


def test_ball_integral_mc_against_lens_quadrature():
    # r=2, n=2: constraints x1, x2, x1+x2 all in the unit-area disk; the exact
    # value is the radial integral of the two-disk intersection area
    r1 = unit_ball_volume(2) ** -0.5

    def lens(d):
        if d >= 2 * r1:
            return 0.0
        return 2 * r1 * r1 * math.acos(d / (2 * r1)) - (d / 2) * math.sqrt(4 * r1 * r1 - d * d)

    rho = np.linspace(0.0, r1, 20001)
    vals = np.array([lens(d) for d in rho]) * 2.0 * np.pi * rho
    oracle = float(np.sum((vals[1:] + vals[:-1]) / 2.0) * (rho[1] - rho[0]))
    val, se = ball_integral_mc([[1, 0, 1], [0, 1, 1]], 1, 2, 200_000,
                               np.random.default_rng(11))
    assert abs(val - oracle) <= 3 * se + 1e-4


def test_beta_321_matches_direct_series_oracle():
    smax = dmax = 30
    acc = 0.0
    for s in range(1, smax + 1):
        for d in range(-dmax, dmax + 1):
            if d != 0 and math.gcd(d, s) == 1:
                acc += s**-3 * min(1.0, (s / abs(d)) ** 3)
    b = beta_coefficient(3, 2, 1, s_max=smax, d_max=dmax)
    assert b.value == pytest.approx(acc, abs=1e-12)
    assert b.rigorous


def test_beta_nonnegative_and_monotone_in_truncation():
    b1 = beta_coefficient(3, 2, 1, s_max=10, d_max=10)
    b2 = beta_coefficient(3, 2, 1, s_max=20, d_max=20)
    assert 0.0 <= b1.value <= b2.value
    rng_a = np.random.default_rng(5)
    rng_b = np.random.default_rng(5)
    a = beta_coefficient(4, 3, 2, s_max=2, d_max=2, mc_samples=4000, rng=rng_a)
    b = beta_coefficient(4, 3, 2, s_max=3, d_max=3, mc_samples=4000, rng=rng_b)
    assert 0.0 <= a.value <= b.value


def test_beta_truncation_stability():
    b1 = beta_coefficient(3, 2, 1, s_max=25, d_max=25)
    b2 = beta_coefficient(3, 2, 1, s_max=50, d_max=50)
    assert abs(b2.value - b1.value) < b1.error


def test_beta_at_least_one_quick():
    # the degree k-1 coefficients majorize 1 already at small truncation
    assert beta_coefficient(3, 2, 1, s_max=10, d_max=10).value >= 1.0
    assert beta_coefficient(4, 2, 1, s_max=10, d_max=10).value >= 1.0
    b = beta_coefficient(4, 3, 2, s_max=4, d_max=4, mc_samples=8000,
                         rng=np.random.default_rng(6))
    assert b.value >= 1.0


def test_beta_zero_column_convention_difference():
    # allowing zero columns admits exactly two extra weight-one terms at k=2:
    # the rows (s, 0) and (0, s), both forced to s = 1 by the gcd condition
    strict = beta_coefficient(3, 2, 1, s_max=15, d_max=15)
    loose = beta_coefficient(3, 2, 1, s_max=15, d_max=15, allow_zero_columns=True)
    assert loose.value - strict.value == pytest.approx(2.0, abs=1e-12)


def test_beta_bad_orders():
    with pytest.raises(errors.BadOrder):
        beta_coefficient(3, 2, 2)
    with pytest.raises(errors.BadOrder):
        beta_coefficient(3, 3, 1)


def test_moment_polynomial_structure():
    P = moment_polynomial(3, 2, s_max=20, d_max=20)
    assert P.coefficients[2] == 1.0
    assert P.coefficients[0] == 0.0
    assert P.coefficient_errors[2] == 0.0
    assert all(c >= 0.0 for c in P.coefficients)
    assert P.evaluate(2.0) == pytest.approx(4.0 + 2.0 * P.coefficients[1])
    with pytest.raises(errors.BadOrder):
        moment_polynomial(3, 3)


def test_q_polynomial():
    P = moment_polynomial(3, 2, s_max=20, d_max=20)
    Q = q_polynomial(3, 2, P)
    assert Q.coefficients[2] == pytest.approx(zeta(3.0) ** -2)
    assert Q.coefficients[1] == P.coefficients[1]
    assert Q.coefficients[0] == 0.0
    for t in (0.01, 0.1, 1.0, 10.0, 1000.0):
        assert Q.evaluate(t) > 0.0


def test_phi_properties():
    P = moment_polynomial(3, 2, s_max=30, d_max=30)
    Q = q_polynomial(3, 2, P)
    values = [phi(3, t, Q) for t in (0.1, 1.0, 10.0, 100.0)]
    for v in values:
        assert 0.0 < v < 1.0
    assert values == sorted(values)  # approaches 1 from below
    assert phi(3, 1e6, Q) > 0.999
    w = omega(3, Q)
    for t in (1.0, 2.0, 5.0, 20.0, 100.0):
        assert 1.0 - phi(3, t, Q) <= w / t + 1e-12


def test_omega_properties():
    P = moment_polynomial(3, 2, s_max=30, d_max=30)
    Q = q_polynomial(3, 2, P)
    w = omega(3, Q)
    assert w >= 1.0
    assert w == pytest.approx(zeta(3.0) ** 2 * Q.coefficients[1])
    doubled = MomentPolynomial(
        n=3, k=2,
        coefficients=(0.0, 2 * Q.coefficients[1], Q.coefficients[2]),
        coefficient_errors=Q.coefficient_errors,
    )
    assert omega(3, doubled) == pytest.approx(2 * w)
