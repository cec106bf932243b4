"""Command-line interface.

Subcommands:
    sample       write a JSONL stream of sampled lattice bases
    experiment   run a TOML-configured experiment, write CSV + JSON reports
    rogers-poly  print a moment polynomial as JSON
    zeta         print a zeta value

Exit codes: 0 success (all pass flags true for `experiment`), 2 when an
experiment identity check fails, 1 on any error.
"""

import argparse
import json
import sys

import numpy as np

from . import errors, harness, rogers
from .sampler import ChainConfig, resolve_method, sample_chain


def _build_parser():
    parser = argparse.ArgumentParser(prog="latstats")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample lattices to a JSONL file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--burnin", type=int, default=5000)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--count", type=int, required=True, help="samples per chain")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=("auto", "exact", "mcmc"), default="auto")

    p = sub.add_parser("experiment", help="run a configured experiment")
    p.add_argument("--config", required=True, help="TOML config with one [experiment] table")
    p.add_argument("--out", required=True, help="output prefix for .csv and .json reports")
    p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("rogers-poly", help="moment polynomial coefficients as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--smax", type=int, default=50)
    p.add_argument("--dmax", type=int, default=50)
    p.add_argument("--mc", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-zero-columns", action="store_true")

    p = sub.add_parser("zeta", help="evaluate the zeta function")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    return parser


def _cmd_sample(args):
    cfg = ChainConfig(
        n=args.n,
        step_sigma=args.sigma,
        burn_in=args.burnin,
        thinning=args.thin,
        chain_count=args.chains,
        samples_per_chain=args.count,
        seed=args.seed,
    )
    method = resolve_method(args.method, args.n)
    with open(args.out, "w") as f:
        for sample in sample_chain(cfg, method=method):
            rec = {
                "n": cfg.n,
                "basis": [float(x) for x in np.asarray(sample.lattice.basis).ravel()],
                "chain": sample.chain,
                "index": sample.index,
            }
            f.write(json.dumps(rec) + "\n")
    return 0


def _cmd_experiment(args):
    spec = harness.load_config(args.config)
    records = harness.run_experiment(spec, threads=args.threads)
    harness.write_csv(records, args.out + ".csv")
    harness.write_json(records, args.out + ".json")
    for r in sorted(records, key=lambda r: (r.statistic, r.t)):
        status = "" if r.passed is None else ("pass" if r.passed else "FAIL")
        theory = "" if r.theory is None else f" theory={r.theory:.6g}"
        print(f"{r.experiment} {r.statistic} t={r.t:g} estimate={r.estimate:.6g} "
              f"stderr={r.stderr:.3g}{theory} {status}".rstrip())
    if any(r.passed is False for r in records):
        return 2
    return 0


def _cmd_rogers_poly(args):
    P = rogers.moment_polynomial(
        args.n,
        args.k,
        s_max=args.smax,
        d_max=args.dmax,
        mc_samples=args.mc,
        seed=args.seed,
        allow_zero_columns=args.allow_zero_columns,
    )
    out = {
        "n": args.n,
        "k": args.k,
        "coefficients": list(P.coefficients),
        "errors": list(P.coefficient_errors),
        "s_max": args.smax,
        "d_max": args.dmax,
        "mc_samples": args.mc,
        "seed": args.seed,
        "allow_zero_columns": args.allow_zero_columns,
    }
    print(json.dumps(out, indent=2))
    return 0


def _cmd_zeta(args):
    print(f"{rogers.zeta(args.s, args.tol):.15g}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    handlers = {
        "sample": _cmd_sample,
        "experiment": _cmd_experiment,
        "rogers-poly": _cmd_rogers_poly,
        "zeta": _cmd_zeta,
    }
    try:
        return handlers[args.command](args)
    except errors.LatstatsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
