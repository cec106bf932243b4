"""Moment-formula combinatorics: zeta constants, partition/matrix enumeration,
ball product integrals, moment polynomial coefficients, and derived bounds.

The k-th moment of the ball counting function over Haar-random unimodular
lattices expands as t^k plus lower-order terms; each degree-r coefficient is
a triple sum over partitions (nu; mu) of {1..k}, integers s >= 1, and r x k
integer matrices D subject to column and gcd conditions, weighted by
(e_1 ... e_r / s^r)^n where e_i = gcd(eps_i, s) and eps_i are the invariant
factors of D.  This module enumerates the truncated sums and attaches error
bounds: rigorous p-series tail bounds for r = 1, Monte Carlo standard error
plus a heuristic truncation estimate for r >= 2.
"""

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import errors, linalg
from .regions import unit_ball_volume, uniform_ball_points


@lru_cache(maxsize=None)
def zeta(s, tol=1e-12):
    """Riemann zeta at real s > 1: partial sum plus the integral tail N^(1-s)/(s-1).

    The cutoff N is chosen from tol; the correction error is below N^-s <= tol.
    """
    if s <= 1.0:
        raise errors.DomainError(f"zeta: need s > 1, got {s}")
    if tol <= 0.0:
        raise errors.DomainError("zeta: tol must be positive")
    N = max(10, math.ceil(tol ** (-1.0 / s)) + 1)
    partial = math.fsum(j ** (-s) for j in range(1, N + 1))
    return partial + N ** (1.0 - s) / (s - 1.0)


def theta(n, k):
    """1 / (zeta(n) * zeta(n-1) * ... * zeta(n-k+1)); always in (0, 1)."""
    if not 1 <= k <= n - 1:
        raise errors.BadOrder(f"theta: need 1 <= k <= n-1, got k={k}, n={n}")
    prod = 1.0
    for j in range(k):
        prod *= zeta(float(n - j))
    return 1.0 / prod


@dataclass(frozen=True)
class RogersPartition:
    """Split of {1..k} into increasing parts nu (size r) and mu (size k-r)."""

    k: int
    r: int
    nu: tuple
    mu: tuple


def partitions(k, r):
    """All C(k, r) partitions (nu; mu), in lexicographic order of nu."""
    if k < 2 or not 1 <= r <= k - 1:
        raise errors.BadOrder(f"partitions: need k >= 2 and 1 <= r <= k-1, got k={k}, r={r}")
    out = []
    universe = set(range(1, k + 1))
    for nu in itertools.combinations(range(1, k + 1), r):
        mu = tuple(sorted(universe - set(nu)))
        out.append(RogersPartition(k=k, r=r, nu=nu, mu=mu))
    return out


@dataclass(frozen=True)
class RogersMatrixTerm:
    """One admissible r x k matrix D with its invariant factors and weight.

    weight = (e_1 * ... * e_r / s^r)^n with e_i = gcd(divisors[i], s).
    """

    matrix: tuple
    s: int
    partition: RogersPartition
    divisors: tuple
    e_factors: tuple
    weight: float


def d_matrices(k, r, s, partition, max_entry, n, allow_zero_columns=False):
    """All admissible r x k matrices with free entries in [-max_entry, max_entry].

    Conditions: the nu-columns are s times the standard basis of Z^r; in a
    mu-column, rows whose nu index exceeds the mu index are zero; every column
    is nonzero (waived by allow_zero_columns); the gcd of all entries is
    coprime to s.  The dimension n enters only through the weight.
    """
    if partition.k != k or partition.r != r:
        raise errors.BadOrder("d_matrices: partition does not match (k, r)")
    if s < 1:
        raise errors.BadOrder(f"d_matrices: need s >= 1, got {s}")
    if max_entry < 1:
        raise errors.BadOrder(f"d_matrices: need max_entry >= 1, got {max_entry}")
    nu, mu = partition.nu, partition.mu
    template = [[0] * k for _ in range(r)]
    for i, col in enumerate(nu):
        template[i][col - 1] = s
    free = []  # (row, col) slots, column-major over mu
    for col in mu:
        for i in range(r):
            if col > nu[i]:
                free.append((i, col - 1))

    mu_cols = [col - 1 for col in mu]
    terms = []
    for values in itertools.product(range(-max_entry, max_entry + 1), repeat=len(free)):
        D = [row[:] for row in template]
        for (i, j), val in zip(free, values):
            D[i][j] = val
        if not allow_zero_columns and any(
            all(D[i][j] == 0 for i in range(r)) for j in mu_cols
        ):
            continue
        g = math.gcd(*(abs(x) for row in D for x in row))
        if math.gcd(g, s) != 1:
            continue
        divisors, _, _ = linalg.smith_normal_form(D)
        e_factors = tuple(math.gcd(d, s) for d in divisors)
        weight = (math.prod(e_factors) / s**r) ** n
        terms.append(
            RogersMatrixTerm(
                matrix=tuple(tuple(row) for row in D),
                s=s,
                partition=partition,
                divisors=divisors,
                e_factors=e_factors,
                weight=weight,
            )
        )
    return terms


def _row_of(D):
    if isinstance(D[0], (tuple, list)):
        if len(D) != 1:
            raise errors.InvalidTerm("expected a 1 x k matrix")
        return [int(x) for x in D[0]]
    return [int(x) for x in D]


def ball_integral_r1(D, s, n):
    """Closed form of the unit-volume-ball product integral for a single row.

    The constraints are concentric balls of radii scaled by s/|d_j|, so the
    integral is min_j min(1, (s/|d_j|)^n).
    """
    row = _row_of(D)
    if any(d == 0 for d in row):
        raise errors.InvalidTerm("ball_integral_r1: zero entry in D")
    return min(1.0, (s / max(abs(d) for d in row)) ** n)


def _r1_integral(row, s, n):
    # zero entries give vacuous constraints (only reachable with zero columns allowed)
    nonzero = [abs(d) for d in row if d != 0]
    if not nonzero:
        return 1.0
    return min(1.0, (s / max(nonzero)) ** n)


def _is_implied_column(col, s):
    # a column with at most one nonzero entry of magnitude <= s constrains
    # nothing beyond the sampling ball itself
    nz = [d for d in col if d != 0]
    return len(nz) <= 1 and all(abs(d) <= s for d in nz)


def ball_integral_mc(D, s, n, samples, rng):
    """Monte Carlo value of the r-fold ball product integral for an r x k matrix.

    Samples each x_i uniformly in the ball of unit volume and averages the
    product of the column constraints; returns (value, standard_error).
    Columns implied by the sampling region are skipped, so a matrix with no
    other columns yields exactly (1.0, 0.0).
    """
    D = [[int(x) for x in row] for row in D]
    r = len(D)
    k = len(D[0])
    if samples < 2:
        raise ValueError("ball_integral_mc: need at least 2 samples")
    radius = unit_ball_volume(n) ** (-1.0 / n)
    cols = [[D[i][j] for i in range(r)] for j in range(k)]
    active = [c for c in cols if not _is_implied_column(c, s)]
    if not active:
        return 1.0, 0.0
    X = uniform_ball_points(rng, samples * r, n, radius).reshape(samples, r, n)
    ind = _column_indicators(active, s, X, radius)
    value = float(ind.mean())
    se = float(ind.std(ddof=1) / math.sqrt(samples))
    return value, se


def _column_indicators(active_cols, s, X, radius):
    """Product over columns of 1[|sum_i (d_i/s) x_i| <= radius], per sample."""
    samples = X.shape[0]
    ind = np.ones(samples, dtype=bool)
    r2 = radius * radius
    for col in active_cols:
        a = np.array(col, dtype=float) / s
        y = np.tensordot(a, X, axes=(0, 1))  # (samples, n)
        ind &= np.einsum("ij,ij->i", y, y) <= r2
    return ind.astype(float)


@dataclass(frozen=True)
class BetaCoefficient:
    """Truncated coefficient value with its error accounting."""

    value: float
    error: float
    truncation_note: str
    mc_standard_error: float
    truncation_bound: float
    rigorous: bool


def _r1_tail_bound(n, k, s_max, d_max, allow_zero_columns):
    """Rigorous bound on the discarded r = 1 terms (s > s_max or an entry > d_max).

    Per partition with m free columns, bound the minimum of the per-column
    factors by their geometric mean; each coordinate then sums to a p-series
    with exponent p = n/m > 1, giving closed-form integral bounds for both
    the s-tail and the entry-tail.
    """
    total = 0.0
    # free-column count m per admissible partition: nu = (v) leaves k - v free
    # columns; without zero columns only v = 1 contributes.
    vs = range(1, k + 1) if allow_zero_columns else (1,)
    for v in vs:
        m = k - v
        if m == 0:
            continue  # single term per s, already inside any truncation at s = 1
        p = n / m
        if p <= 1.0:
            raise errors.BadOrder("tail bound needs k - 1 < n")
        gamma = 1.0 + 1.0 / (p - 1.0)
        # s-tail: sum_{s > s_max} s^-n (2 gamma s)^m <= (2 gamma)^m s_max^(m-n+1)/(n-m-1)
        total += (2.0 * gamma) ** m * s_max ** (m - n + 1) / (n - m - 1)
        # entry-tail: one coordinate beyond d_max, s <= s_max
        coord_tail = 2.0 * d_max ** (1.0 - p) / (p - 1.0)
        for s in range(1, s_max + 1):
            total += s ** (-n) * m * (coord_tail * s**p) * (2.0 * gamma * s) ** (m - 1)
    return total


def beta_coefficient(
    n,
    k,
    r,
    s_max=50,
    d_max=50,
    mc_samples=100_000,
    rng=None,
    allow_zero_columns=False,
):
    """Degree-r coefficient of the k-th ball moment polynomial, truncated.

    r = 1 terms use the closed-form integral and carry a rigorous tail bound.
    r >= 2 terms share one Monte Carlo sample batch across all matrices (so
    enlarging the truncation never decreases the value) and report the Monte
    Carlo standard error plus a heuristic tail estimate.
    """
    if not 1 <= r <= k - 1:
        raise errors.BadOrder(f"beta_coefficient: need 1 <= r <= k-1, got r={r}, k={k}")
    if not 2 <= k <= n - 1:
        raise errors.BadOrder(f"beta_coefficient: need 2 <= k <= n-1, got k={k}, n={n}")
    if s_max < 1 or d_max < 1:
        raise errors.BadOrder("beta_coefficient: truncations must be positive")

    parts = partitions(k, r)
    if r == 1:
        contributions = []
        for part in parts:
            for s in range(1, s_max + 1):
                for term in d_matrices(k, 1, s, part, d_max, n, allow_zero_columns):
                    contributions.append(term.weight * _r1_integral(term.matrix[0], s, n))
        value = math.fsum(contributions)
        tail = _r1_tail_bound(n, k, s_max, d_max, allow_zero_columns)
        note = f"rigorous p-series tail bound at s_max={s_max}, d_max={d_max}"
        return BetaCoefficient(
            value=value,
            error=tail,
            truncation_note=note,
            mc_standard_error=0.0,
            truncation_bound=tail,
            rigorous=True,
        )

    if rng is None:
        rng = np.random.default_rng(0)
    radius = unit_ball_volume(n) ** (-1.0 / n)
    X = uniform_ball_points(rng, mc_samples * r, n, radius).reshape(mc_samples, r, n)
    acc = np.zeros(mc_samples)
    shell_s = 0.0  # mean contribution of the outermost s shell
    shell_d = 0.0  # mean contribution of terms touching the entry bound
    for part in parts:
        for s in range(1, s_max + 1):
            for term in d_matrices(k, r, s, part, d_max, n, allow_zero_columns):
                cols = [
                    [term.matrix[i][j] for i in range(r)] for j in range(k)
                ]
                active = [c for c in cols if not _is_implied_column(c, s)]
                if active:
                    vals = _column_indicators(active, s, X, radius)
                else:
                    vals = 1.0
                acc += term.weight * vals
                mean_val = float(np.mean(vals)) if active else 1.0
                if s == s_max:
                    shell_s += term.weight * mean_val
                if any(abs(x) == d_max for row in term.matrix for x in row):
                    shell_d += term.weight * mean_val
    value = float(acc.mean())
    mc_se = float(acc.std(ddof=1) / math.sqrt(mc_samples))
    # shells decay like s^(-r n) and |d|^(-n); extrapolate geometrically
    tail_est = shell_s * s_max / (r * n - 1.0) + shell_d * d_max / (n - 1.0)
    note = (
        f"heuristic: mc standard error plus extrapolated shells at "
        f"s_max={s_max}, d_max={d_max}"
    )
    return BetaCoefficient(
        value=value,
        error=mc_se + tail_est,
        truncation_note=note,
        mc_standard_error=mc_se,
        truncation_bound=tail_est,
        rigorous=False,
    )


@dataclass(frozen=True)
class MomentPolynomial:
    """Polynomial with coefficients indexed by degree and per-coefficient errors."""

    n: int
    k: int
    coefficients: tuple
    coefficient_errors: tuple

    def evaluate(self, t):
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def evaluation_error(self, t):
        return sum(e * t**i for i, e in enumerate(self.coefficient_errors))


def moment_polynomial(
    n,
    k,
    s_max=50,
    d_max=50,
    mc_samples=100_000,
    seed=0,
    allow_zero_columns=False,
):
    """The k-th ball moment polynomial: monic of degree k with zero constant term.

    Coefficient r is the truncated degree-r sum; each inner Monte Carlo run
    (r >= 2 only) draws from an independent generator split from `seed`.
    """
    if not 2 <= k <= n - 1:
        raise errors.BadOrder(f"moment_polynomial: need 2 <= k <= n-1, got k={k}, n={n}")
    coeffs = [0.0] * (k + 1)
    errs = [0.0] * (k + 1)
    coeffs[k] = 1.0
    for r in range(1, k):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,)))
        b = beta_coefficient(
            n, k, r,
            s_max=s_max, d_max=d_max, mc_samples=mc_samples,
            rng=rng, allow_zero_columns=allow_zero_columns,
        )
        coeffs[r] = b.value
        errs[r] = b.error
    return MomentPolynomial(n=n, k=k, coefficients=tuple(coeffs), coefficient_errors=tuple(errs))


def q_polynomial(n, k, P):
    """Centered variant: the leading coefficient 1 is replaced by zeta(n)^-k."""
    if P.n != n or P.k != k:
        raise errors.BadOrder("q_polynomial: polynomial does not match (n, k)")
    coeffs = list(P.coefficients)
    coeffs[k] = zeta(float(n)) ** (-k)
    return MomentPolynomial(
        n=n, k=k, coefficients=tuple(coeffs), coefficient_errors=P.coefficient_errors
    )


def phi(n, t, Q):
    """Lower-bound profile in (0, 1) built from the degree n-1 centered polynomial."""
    if t <= 0:
        raise errors.DomainError(f"phi: need t > 0, got {t}")
    if Q.k != n - 1:
        raise errors.BadOrder(f"phi: expected polynomial of degree n-1 = {n-1}, got {Q.k}")
    numerator = zeta(float(n)) ** (-(n - 1)) * t ** (n - 1)
    denom = Q.evaluate(t)
    if denom <= 0:
        raise errors.DomainError("phi: polynomial not positive at t")
    return (numerator / denom) ** (n - 2)


def omega(n, Q):
    """Sum of the non-leading coefficients of [zeta(n)^(n-1) Q(T)]^(n-2); at least 1."""
    if Q.k != n - 1:
        raise errors.BadOrder(f"omega: expected polynomial of degree n-1 = {n-1}, got {Q.k}")
    scale = zeta(float(n)) ** (n - 1)
    scaled = [scale * c for c in Q.coefficients]
    poly = np.array([1.0])
    for _ in range(n - 2):
        poly = np.convolve(poly, scaled)
    return float(np.sum(poly[:-1]))
