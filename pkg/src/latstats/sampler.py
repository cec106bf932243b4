"""Haar-distributed unimodular lattices.

For n = 2 the Haar law is sampled exactly: a point of the classical
fundamental domain {|x| <= 1/2, |z| >= 1} drawn with density proportional to
y^-2, combined with a uniform rotation.  For n >= 3 a random-walk Markov
chain is used: left multiplication by exp(eps) with eps Gaussian in the
trace-zero matrices leaves the Haar law invariant, and the mean-value
identities of the siegel module give strong external checks of mixing.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import errors
from .lattice import UnimodularLattice


@dataclass
class ChainConfig:
    """Sampler configuration; fully determines the emitted lattice stream."""

    n: int
    step_sigma: float = 0.5
    burn_in: int = 5000
    thinning: int = 10
    chain_count: int = 4
    samples_per_chain: int = 2500
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise errors.ConfigError(f"sampler.n: must be >= 2, got {self.n}")
        if not 0.0 < self.step_sigma <= 2.0:
            raise errors.ConfigError(f"sampler.step_sigma: must lie in (0, 2], got {self.step_sigma}")
        if self.burn_in < 0:
            raise errors.ConfigError("sampler.burn_in: must be nonnegative")
        if self.thinning < 1:
            raise errors.ConfigError("sampler.thinning: must be >= 1")
        if self.chain_count < 1:
            raise errors.ConfigError("sampler.chain_count: must be >= 1")
        if self.samples_per_chain < 1:
            raise errors.ConfigError("sampler.samples_per_chain: must be >= 1")


@dataclass(frozen=True)
class ChainSample:
    chain: int
    index: int
    lattice: UnimodularLattice


def chain_rng(seed, chain_index):
    """Generator for one chain, split deterministically from (seed, chain index)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chain_index,)))


def sample_sl2_exact(rng):
    """One exactly Haar-distributed unimodular lattice in R^2."""
    # z = x + iy from the fundamental domain with density prop. to y^-2:
    # propose on the strip y >= sqrt(3)/2 (where the density factorizes) and
    # reject the points below the unit circle; acceptance rate ~ 0.91.
    while True:
        x = rng.uniform(-0.5, 0.5)
        y = (math.sqrt(3.0) / 2.0) / (1.0 - rng.random())
        if x * x + y * y >= 1.0:
            break
    theta = rng.uniform(0.0, 2.0 * math.pi)
    c, s = math.cos(theta), math.sin(theta)
    sy = math.sqrt(y)
    basis = np.array([[c, -s], [s, c]]) @ np.array([[1.0 / sy, x / sy], [0.0, sy]])
    return UnimodularLattice(basis)


def mcmc_step(lat, step_sigma, rng):
    """One random-walk step: left-multiply the basis by exp(eps).

    eps has independent Gaussian coordinates on the elementary trace-zero
    matrices.  The result is renormalized to determinant exactly 1 and
    LLL-reduced (a basis change, never a lattice change).
    """
    n = lat.n
    eps = rng.normal(0.0, step_sigma, size=(n, n))
    diag = rng.normal(0.0, step_sigma, size=n - 1)
    eps[np.arange(n), np.arange(n)] = 0.0
    eps[np.arange(n - 1), np.arange(n - 1)] = diag
    eps[n - 1, n - 1] = -diag.sum()
    g = scipy.linalg.expm(eps)
    B = g @ lat.basis
    B /= np.linalg.det(B) ** (1.0 / n)
    return UnimodularLattice(B, det_tolerance=lat.det_tolerance)


def single_chain(config, chain_index, method="mcmc"):
    """Samples from one chain, in emission order.

    method "mcmc": burn-in from Z^n, then every thinning-th state.
    method "exact": i.i.d. exact draws (n = 2 only); burn-in/thinning unused.
    """
    rng = chain_rng(config.seed, chain_index)
    if method == "exact":
        if config.n != 2:
            raise errors.ConfigError("sampler: exact sampling is available only for n = 2")
        for _ in range(config.samples_per_chain):
            yield sample_sl2_exact(rng)
        return
    if method != "mcmc":
        raise errors.ConfigError(f"sampler: unknown method {method!r}")
    state = UnimodularLattice.standard(config.n)
    for _ in range(config.burn_in):
        state = mcmc_step(state, config.step_sigma, rng)
    for _ in range(config.samples_per_chain):
        for _ in range(config.thinning):
            state = mcmc_step(state, config.step_sigma, rng)
        yield state


def resolve_method(method, n):
    """Resolve 'auto' to the exact sampler at n = 2 and MCMC otherwise."""
    if method == "auto":
        return "exact" if n == 2 else "mcmc"
    if method in ("exact", "mcmc"):
        return method
    raise errors.ConfigError(f"sampler.method: unknown method {method!r}")


def sample_chain(config, method="mcmc"):
    """Interleaved stream over all chains: sample 0 of each chain, then sample 1, ...

    Each chain owns its generator, so the per-chain subsequences match
    single-chain runs with the derived seeds exactly.
    """
    gens = [single_chain(config, c, method=method) for c in range(config.chain_count)]
    for index in range(config.samples_per_chain):
        for chain, gen in enumerate(gens):
            yield ChainSample(chain=chain, index=index, lattice=next(gen))


def stationarity_diagnostics(series, batches):
    """Batch-means mean, standard error, and integrated autocorrelation time.

    The series is split into `batches` equal batches (trailing remainder
    dropped); the autocorrelation time is estimated as
    batch_length * Var(batch means) / Var(series), which is ~1 for i.i.d. data.
    """
    x = np.asarray(series, dtype=float)
    if batches < 2:
        raise errors.InsufficientData("stationarity_diagnostics: need at least 2 batches")
    if x.size < 2 * batches:
        raise errors.InsufficientData(
            f"stationarity_diagnostics: series length {x.size} < 2 * {batches}"
        )
    mean = float(x.mean())
    blen = x.size // batches
    bm = x[: blen * batches].reshape(batches, blen).mean(axis=1)
    se = float(bm.std(ddof=1) / math.sqrt(batches))
    var = float(x.var(ddof=1))
    if var == 0.0:
        return mean, 0.0, 1.0
    tau = max(1.0, blen * float(bm.var(ddof=1)) / var)
    return mean, se, tau


def autocorrelation(series, lag):
    """Sample autocorrelation of a series at the given lag."""
    x = np.asarray(series, dtype=float)
    if lag < 1 or x.size <= lag + 1:
        raise errors.InsufficientData("autocorrelation: series too short for lag")
    x = x - x.mean()
    denom = float(x @ x)
    if denom == 0.0:
        return 0.0
    return float(x[:-lag] @ x[lag:]) / denom
