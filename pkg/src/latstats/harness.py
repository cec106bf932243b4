"""Config-driven, seeded Monte Carlo experiments with CSV/JSON reporting.

Eight experiment families over a stream of Haar-random lattices:

    E1  mean nonzero-point count on each region equals its volume t
    E2  mean primitive-point count equals t / zeta(n)
    E3  mean independent k-tuple counts equal t^k and (t/zeta(n))^k
    E4  mean primitive k-tuple count equals theta_{n,k} t^k, plus the growth
        of its variance against t^(2k-1) across the region family
    E5  tail probability that the primitive points of the region span fewer
        than n-2 dimensions: 1/t decay fit and the polynomial lower bound on
        the complementary event
    E6  growth trends along nested regions: mean independent (n-2)-tuple
        counts and the ratio Pr / t^k against its limit
    E7  comparison of the empirical k-th moment of the primitive count on a
        non-ball region against the centered ball moment polynomial
    E8  tail probability of at most two primitive points: 1/t decay fit and
        a no-increasing-trend test for p_t * t

Determinism contract: a (config, seed) pair produces byte-identical CSV and
JSON output for any thread count.  Chains are the unit of parallelism; each
owns a generator split from (seed, chain index), and reduction happens in
chain-major order with exact compensated summation.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import tomli

from . import errors, rogers, siegel
from .lattice import enumerate_nonzero_in_radius
from .regions import region_from_config
from .sampler import ChainConfig, resolve_method, single_chain

EXPERIMENTS = ("E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8")

CSV_COLUMNS = ("experiment", "statistic", "n", "t", "estimate", "stderr",
               "theory", "pass", "samples", "seed")


@dataclass
class ExperimentSpec:
    """One experiment: regions, sampler, and estimator options."""

    experiment: str
    n: int
    regions: list
    sampler: ChainConfig
    k: int = 0  # tuple order / rank, where the experiment uses one
    method: str = "auto"
    confidence: float = 3.0
    batches: int = 16
    s_max: int = 50
    d_max: int = 50
    mc_samples: int = 100_000


@dataclass
class ResultRecord:
    """One output row; `theory` and `passed` are None when not applicable."""

    experiment: str
    statistic: str
    n: int
    t: float
    estimate: float
    stderr: float
    theory: float | None
    passed: bool | None
    samples: int
    seed: int

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "statistic": self.statistic,
            "n": self.n,
            "t": self.t,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "theory": self.theory,
            "pass": self.passed,
            "samples": self.samples,
            "seed": self.seed,
        }


def validate_spec(spec):
    if spec.experiment not in EXPERIMENTS:
        raise errors.ConfigError(f"experiment.id: unknown experiment {spec.experiment!r}")
    if spec.n < 2:
        raise errors.ConfigError(f"experiment.n: must be >= 2, got {spec.n}")
    if not spec.regions:
        raise errors.ConfigError("experiment.regions: at least one region required")
    for i, region in enumerate(spec.regions):
        if region.dim != spec.n:
            raise errors.ConfigError(
                f"experiment.regions[{i}]: dimension {region.dim} != n = {spec.n}"
            )
    if spec.sampler.n != spec.n:
        raise errors.ConfigError("experiment.sampler.n: does not match experiment.n")
    if spec.method not in ("auto", "exact", "mcmc"):
        raise errors.ConfigError(f"experiment.method: unknown method {spec.method!r}")
    if spec.method == "exact" and spec.n != 2:
        raise errors.ConfigError("experiment.method: exact sampling requires n = 2")
    if spec.confidence <= 0:
        raise errors.ConfigError("experiment.confidence: must be positive")
    if spec.experiment == "E3":
        if not 1 <= spec.k <= spec.n - 1:
            raise errors.ConfigError(
                f"experiment.k: independent tuples need 1 <= k <= n-1, got {spec.k}"
            )
    if spec.experiment in ("E4", "E6"):
        if not 1 <= spec.k or 2 * spec.k > spec.n - 1:
            raise errors.ConfigError(
                f"experiment.k: primitive-tuple experiments need 1 <= k <= (n-1)/2, got {spec.k}"
            )
    if spec.experiment == "E7":
        if not 1 <= spec.k <= spec.n - 1:
            raise errors.ConfigError(
                f"experiment.k: moment comparison needs 1 <= k <= n-1, got {spec.k}"
            )
        if spec.k < 2:
            raise errors.ConfigError(
                "experiment.k: moment comparison needs k >= 2 for a nontrivial bound"
            )
    if spec.experiment in ("E5", "E6", "E8") and spec.n < 3:
        raise errors.ConfigError(f"experiment.n: {spec.experiment} needs n >= 3")


def _stat_plan(spec):
    """(statistic name, region index) pairs the experiment needs per lattice."""
    pairs = []
    nreg = range(len(spec.regions))
    if spec.experiment == "E1":
        pairs = [("siegel", i) for i in nreg]
    elif spec.experiment == "E2":
        pairs = [("siegel_pr", i) for i in nreg]
    elif spec.experiment == "E3":
        for i in nreg:
            pairs.append((f"tilde_k:{spec.k}", i))
            pairs.append((f"tilde_k_pr:{spec.k}", i))
    elif spec.experiment == "E4":
        pairs = [(f"pr_tuples:{spec.k}", i) for i in nreg]
    elif spec.experiment == "E5":
        pairs = [(f"omega:{spec.n - 2}", i) for i in nreg]
    elif spec.experiment == "E6":
        for i in nreg:
            pairs.append((f"tilde_k_pr:{spec.n - 2}", i))
            pairs.append((f"pr_tuples:{spec.k}", i))
    elif spec.experiment == "E7":
        pairs = [("siegel_pr", i) for i in nreg]
    elif spec.experiment == "E8":
        pairs = [("pr_card_le:2", i) for i in nreg]
    return pairs


def _collect_series(spec, plan, threads):
    """Per-chain value series for every planned statistic, in chain order."""
    cfg = spec.sampler
    method = resolve_method(spec.method, spec.n)
    radius = max(spec.regions[i].bounding_radius for _, i in plan)

    def worker(chain):
        out = {key: np.empty(cfg.samples_per_chain) for key in plan}
        for idx, lat in enumerate(single_chain(cfg, chain, method=method)):
            pts = enumerate_nonzero_in_radius(lat, radius)
            for name, ridx in plan:
                out[(name, ridx)][idx] = siegel.evaluate_statistic(
                    name, spec.regions[ridx], lat, points=pts
                )
        return out

    if threads <= 1:
        per_chain = [worker(c) for c in range(cfg.chain_count)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(worker, c) for c in range(cfg.chain_count)]
            per_chain = [f.result() for f in futures]
    return {key: [per_chain[c][key] for c in range(cfg.chain_count)] for key in plan}


def _pooled(chain_series):
    vals = []
    for arr in chain_series:
        vals.extend(arr.tolist())
    return vals


def combined_mean(chain_series):
    """Exact compensated mean over the chain-major concatenation."""
    vals = _pooled(chain_series)
    return math.fsum(vals) / len(vals)


def _batch_means(chain_series, batches):
    bms = []
    for arr in chain_series:
        b = min(batches, arr.size)
        blen = arr.size // b
        for i in range(b):
            chunk = arr[i * blen : (i + 1) * blen]
            bms.append(math.fsum(chunk.tolist()) / blen)
    return bms


def mean_with_error(chain_series, batches, iid):
    """(mean, standard error); batch means within chains unless samples are i.i.d."""
    mean = combined_mean(chain_series)
    if iid:
        vals = _pooled(chain_series)
        var = math.fsum((v - mean) ** 2 for v in vals) / max(1, len(vals) - 1)
        return mean, math.sqrt(var / len(vals))
    bms = _batch_means(chain_series, batches)
    if len(bms) < 2:
        return mean, float("nan")
    bmean = math.fsum(bms) / len(bms)
    var = math.fsum((b - bmean) ** 2 for b in bms) / (len(bms) - 1)
    return mean, math.sqrt(var / len(bms))


def effective_samples(chain_series, batches):
    """Total sample count deflated by the batch-means autocorrelation time."""
    vals = _pooled(chain_series)
    total = len(vals)
    mean = math.fsum(vals) / total
    var = math.fsum((v - mean) ** 2 for v in vals) / max(1, total - 1)
    if var == 0.0:
        return float(total)
    bms = _batch_means(chain_series, batches)
    blen = total / len(bms)
    bmean = math.fsum(bms) / len(bms)
    bvar = math.fsum((b - bmean) ** 2 for b in bms) / max(1, len(bms) - 1)
    tau = max(1.0, blen * bvar / var)
    return total / tau


def wilson_halfwidth(p, n_eff, z):
    """Half-width of the Wilson score interval at z standard normal units."""
    if n_eff <= 0:
        return 1.0
    z2 = z * z
    return (z / (1.0 + z2 / n_eff)) * math.sqrt(
        p * (1.0 - p) / n_eff + z2 / (4.0 * n_eff * n_eff)
    )


def proportion_with_error(chain_series, batches, iid, z):
    """(proportion, stderr, effective sample count).

    z * stderr is the Wilson interval half-width at the effective sample size,
    so rare events never report a zero error.
    """
    p = combined_mean(chain_series)
    n_eff = float(sum(arr.size for arr in chain_series)) if iid else effective_samples(
        chain_series, batches
    )
    return p, wilson_halfwidth(p, n_eff, z) / z, n_eff


def variance_with_error(chain_series, batches):
    """(variance, stderr) via the spread of per-batch variances."""
    vals = _pooled(chain_series)
    mean = math.fsum(vals) / len(vals)
    var = math.fsum((v - mean) ** 2 for v in vals) / max(1, len(vals) - 1)
    bvars = []
    for arr in chain_series:
        b = min(batches, arr.size)
        blen = arr.size // b
        for i in range(b):
            chunk = arr[i * blen : (i + 1) * blen]
            if chunk.size >= 2:
                bvars.append(float(np.var(chunk, ddof=1)))
    if len(bvars) < 2:
        return var, float("nan")
    bmean = math.fsum(bvars) / len(bvars)
    spread = math.fsum((b - bmean) ** 2 for b in bvars) / (len(bvars) - 1)
    return var, math.sqrt(spread / len(bvars))


def fit_line(xs, ys, sigmas):
    """Weighted least squares fit y = a + b x; returns (b, se_b, a)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    w = 1.0 / np.maximum(np.asarray(sigmas, dtype=float), 1e-300) ** 2
    sw = w.sum()
    xbar = float((w * xs).sum() / sw)
    ybar = float((w * ys).sum() / sw)
    sxx = float((w * (xs - xbar) ** 2).sum())
    if sxx == 0.0:
        return float("nan"), float("nan"), ybar
    slope = float((w * (xs - xbar) * (ys - ybar)).sum() / sxx)
    intercept = ybar - slope * xbar
    se = math.sqrt(1.0 / sxx)
    return slope, se, intercept


def _identity_record(spec, name, t, mean, se, theory, samples):
    passed = abs(mean - theory) <= spec.confidence * se
    return ResultRecord(spec.experiment, name, spec.n, t, mean, se, theory,
                        bool(passed), samples, spec.sampler.seed)


def run_experiment(spec, threads=1):
    """Run one experiment; returns records sorted by (statistic, t)."""
    validate_spec(spec)
    plan = _stat_plan(spec)
    series = _collect_series(spec, plan, threads)
    method = resolve_method(spec.method, spec.n)
    iid = method == "exact"
    cfg = spec.sampler
    total = cfg.chain_count * cfg.samples_per_chain
    zn = rogers.zeta(float(spec.n))
    records = []

    def mean_se(name, ridx):
        return mean_with_error(series[(name, ridx)], spec.batches, iid)

    if spec.experiment == "E1":
        for i, region in enumerate(spec.regions):
            mean, se = mean_se("siegel", i)
            records.append(_identity_record(spec, "siegel", region.volume, mean, se,
                                            region.volume, total))
    elif spec.experiment == "E2":
        for i, region in enumerate(spec.regions):
            mean, se = mean_se("siegel_pr", i)
            records.append(_identity_record(spec, "siegel_pr", region.volume, mean, se,
                                            region.volume / zn, total))
    elif spec.experiment == "E3":
        for i, region in enumerate(spec.regions):
            t = region.volume
            mean, se = mean_se(f"tilde_k:{spec.k}", i)
            records.append(_identity_record(spec, f"tilde_k:{spec.k}", t, mean, se,
                                            t ** spec.k, total))
            mean, se = mean_se(f"tilde_k_pr:{spec.k}", i)
            records.append(_identity_record(spec, f"tilde_k_pr:{spec.k}", t, mean, se,
                                            (t / zn) ** spec.k, total))
    elif spec.experiment == "E4":
        records.extend(_run_e4(spec, series, iid, total))
    elif spec.experiment == "E5":
        records.extend(_run_e5(spec, series, iid, total))
    elif spec.experiment == "E6":
        records.extend(_run_e6(spec, series, iid, total, zn))
    elif spec.experiment == "E7":
        records.extend(_run_e7(spec, series, iid, total))
    elif spec.experiment == "E8":
        records.extend(_run_e8(spec, series, iid, total))

    records.sort(key=lambda r: (r.statistic, r.t))
    return records


def _run_e4(spec, series, iid, total):
    records = []
    name = f"pr_tuples:{spec.k}"
    th = rogers.theta(spec.n, spec.k)
    ts, variances, var_ses = [], [], []
    for i, region in enumerate(spec.regions):
        t = region.volume
        mean, se = mean_with_error(series[(name, i)], spec.batches, iid)
        records.append(_identity_record(spec, name, t, mean, se, th * t ** spec.k, total))
        var, var_se = variance_with_error(series[(name, i)], spec.batches)
        records.append(ResultRecord(spec.experiment, f"var:{name}", spec.n, t,
                                    var, var_se, None, None, total, spec.sampler.seed))
        ts.append(t)
        variances.append(var)
        var_ses.append(var_se)
    if len(ts) >= 2:
        sigmas = [max(vs / v, 1e-12) if v > 0 else 1.0
                  for v, vs in zip(variances, var_ses)]
        logv = [math.log(max(v, 1e-300)) for v in variances]
        slope, se, _ = fit_line([math.log(t) for t in ts], logv, sigmas)
        target = 2 * spec.k - 1
        passed = 0.8 * target <= slope <= 1.2 * target
        records.append(ResultRecord(spec.experiment, f"var_slope:{name}", spec.n, 0.0,
                                    slope, se, None, bool(passed), total,
                                    spec.sampler.seed))
    return records


def _tail_records(spec, series, name, iid, total, scaled_name):
    """Shared decay machinery for the tail experiments: per-t rates, a log-log
    slope (pass: <= -0.8), a no-increasing-trend test on p_t * t at one-sided
    95%, and the fitted constant."""
    records = []
    ts, ps, ses, neffs = [], [], [], []
    for i, region in enumerate(spec.regions):
        t = region.volume
        p, se, n_eff = proportion_with_error(series[(name, i)], spec.batches, iid,
                                             spec.confidence)
        records.append(ResultRecord(spec.experiment, name, spec.n, t, p, se,
                                    None, None, total, spec.sampler.seed))
        ts.append(t)
        ps.append(p)
        ses.append(se)
        neffs.append(n_eff)
    if len(ts) >= 2:
        # smoothed rates keep the log fit finite when a tail count is zero
        smoothed = [(p * ne + 0.5) / (ne + 1.0) for p, ne in zip(ps, neffs)]
        log_sigma = [max(se / sp, 1e-12) for se, sp in zip(ses, smoothed)]
        slope, slope_se, intercept = fit_line([math.log(t) for t in ts],
                                              [math.log(sp) for sp in smoothed],
                                              log_sigma)
        records.append(ResultRecord(spec.experiment, f"slope:{name}", spec.n, 0.0,
                                    slope, slope_se, None, bool(slope <= -0.8),
                                    total, spec.sampler.seed))
        records.append(ResultRecord(spec.experiment, f"constant:{name}", spec.n, 0.0,
                                    math.exp(intercept), 0.0, None, None, total,
                                    spec.sampler.seed))
        scaled = [p * t for p, t in zip(smoothed, ts)]
        scaled_se = [se * t for se, t in zip(ses, ts)]
        tslope, tse, _ = fit_line([math.log(t) for t in ts], scaled, scaled_se)
        no_increase = tslope <= 1.645 * tse
        records.append(ResultRecord(spec.experiment, f"trend:{scaled_name}", spec.n,
                                    0.0, tslope, tse, None, bool(no_increase), total,
                                    spec.sampler.seed))
    return records


def _run_e5(spec, series, iid, total):
    name = f"omega:{spec.n - 2}"
    records = _tail_records(spec, series, name, iid, total, f"{name}*t")
    P = rogers.moment_polynomial(spec.n, spec.n - 1, s_max=spec.s_max,
                                 d_max=spec.d_max, mc_samples=spec.mc_samples,
                                 seed=spec.sampler.seed)
    Q = rogers.q_polynomial(spec.n, spec.n - 1, P)
    for i, region in enumerate(spec.regions):
        t = region.volume
        p, se, _ = proportion_with_error(series[(name, i)], spec.batches, iid,
                                         spec.confidence)
        bound = rogers.phi(spec.n, t, Q)
        margin = (1.0 - p) - bound
        records.append(ResultRecord(spec.experiment, f"theta_margin:{spec.n - 2}",
                                    spec.n, t, margin, se, None,
                                    bool(margin >= -spec.confidence * se), total,
                                    spec.sampler.seed))
        records.append(ResultRecord(spec.experiment, f"phi_bound:{spec.n - 2}",
                                    spec.n, t, bound, 0.0, None, None, total,
                                    spec.sampler.seed))
    records.sort(key=lambda r: (r.statistic, r.t))
    return records


def _run_e6(spec, series, iid, total, zn):
    records = []
    tuple_name = f"tilde_k_pr:{spec.n - 2}"
    pr_name = f"pr_tuples:{spec.k}"
    th = rogers.theta(spec.n, spec.k)
    ts, devs, dev_ses = [], [], []
    for i, region in enumerate(spec.regions):
        t = region.volume
        mean, se = mean_with_error(series[(tuple_name, i)], spec.batches, iid)
        records.append(_identity_record(spec, tuple_name, t, mean, se,
                                        (t / zn) ** (spec.n - 2), total))
        scale = t ** spec.k
        ratio_series = [arr / scale for arr in series[(pr_name, i)]]
        mean, se = mean_with_error(ratio_series, spec.batches, iid)
        records.append(_identity_record(spec, f"ratio:{pr_name}", t, mean, se, th, total))
        dev_series = [np.abs(arr / scale - th) for arr in series[(pr_name, i)]]
        dmean, dse = mean_with_error(dev_series, spec.batches, iid)
        records.append(ResultRecord(spec.experiment, f"absdev:{pr_name}", spec.n, t,
                                    dmean, dse, None, None, total, spec.sampler.seed))
        ts.append(t)
        devs.append(dmean)
        dev_ses.append(dse)
    if len(ts) >= 2:
        # the ratio concentrates, so its mean absolute deviation must shrink
        gap = devs[-1] - devs[0]
        gap_se = math.hypot(dev_ses[-1], dev_ses[0])
        records.append(ResultRecord(spec.experiment, f"trend:absdev:{pr_name}", spec.n,
                                    0.0, gap, gap_se, None, bool(gap < 0.0), total,
                                    spec.sampler.seed))
    return records


def _run_e7(spec, series, iid, total):
    records = []
    P = rogers.moment_polynomial(spec.n, spec.k, s_max=spec.s_max, d_max=spec.d_max,
                                 mc_samples=spec.mc_samples, seed=spec.sampler.seed)
    Q = rogers.q_polynomial(spec.n, spec.k, P)
    for i, region in enumerate(spec.regions):
        t = region.volume
        moment_series = [arr ** spec.k for arr in series[("siegel_pr", i)]]
        mean, se = mean_with_error(moment_series, spec.batches, iid)
        bound = Q.evaluate(t)
        bound_err = Q.evaluation_error(t)
        records.append(ResultRecord(spec.experiment, f"pr_moment:{spec.k}", spec.n, t,
                                    mean, se, None,
                                    bool(mean <= bound + bound_err + spec.confidence * se),
                                    total, spec.sampler.seed))
        records.append(ResultRecord(spec.experiment, f"q_bound:{spec.k}", spec.n, t,
                                    bound, bound_err, None, None, total,
                                    spec.sampler.seed))
    return records


def _run_e8(spec, series, iid, total):
    return _tail_records(spec, series, "pr_card_le:2", iid, total, "pr_card_le:2*t")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def write_csv(records, path):
    """Rows sorted by (experiment, statistic, t); floats at 9 significant digits."""
    ordered = sorted(records, key=lambda r: (r.experiment, r.statistic, r.t))
    lines = [",".join(CSV_COLUMNS)]
    for r in ordered:
        lines.append(",".join([
            r.experiment, r.statistic, str(r.n), _fmt(r.t), _fmt(r.estimate),
            _fmt(r.stderr), _fmt(r.theory), _fmt(r.passed), str(r.samples),
            str(r.seed),
        ]))
    with open(path, "w", newline="") as f:
        f.write("\n".join(lines) + "\n")


def write_json(records, path):
    ordered = sorted(records, key=lambda r: (r.experiment, r.statistic, r.t))
    with open(path, "w") as f:
        json.dump([r.to_dict() for r in ordered], f, indent=2)
        f.write("\n")


def _require(table, key, types, path):
    if key not in table:
        raise errors.ConfigError(f"{path}.{key}: missing")
    val = table[key]
    if not isinstance(val, types):
        raise errors.ConfigError(f"{path}.{key}: expected {types}, got {type(val).__name__}")
    return val


def load_config(path):
    """Parse a TOML experiment file into an ExperimentSpec."""
    with open(path, "rb") as f:
        data = tomli.load(f)
    if "experiment" not in data:
        raise errors.ConfigError("experiment: missing table")
    exp = data["experiment"]
    ident = _require(exp, "id", str, "experiment")
    n = _require(exp, "n", int, "experiment")
    region_cfgs = _require(exp, "regions", list, "experiment")
    regions = []
    for i, cfg in enumerate(region_cfgs):
        try:
            regions.append(region_from_config(cfg))
        except errors.LatstatsError as exc:
            raise errors.ConfigError(f"experiment.regions[{i}]: {exc}") from exc
    sampler_cfg = dict(exp.get("sampler", {}))
    sampler_cfg.setdefault("n", n)
    try:
        sampler = ChainConfig(**sampler_cfg)
    except TypeError as exc:
        raise errors.ConfigError(f"experiment.sampler: {exc}") from exc
    spec = ExperimentSpec(
        experiment=ident,
        n=n,
        regions=regions,
        sampler=sampler,
        k=int(exp.get("k", exp.get("l", 0))),
        method=exp.get("method", "auto"),
        confidence=float(exp.get("confidence", 3.0)),
        batches=int(exp.get("batches", 16)),
        s_max=int(exp.get("s_max", 50)),
        d_max=int(exp.get("d_max", 50)),
        mc_samples=int(exp.get("mc_samples", 100_000)),
    )
    validate_spec(spec)
    return spec
