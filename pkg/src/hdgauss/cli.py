"""Command-line entry point: ``hdgauss <subcommand> [options]``."""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, expand_grid, load_config, validate
from .exceptions import ConfigError, HDGaussError
from .experiments import rate_fit, run_experiment
from .gaussball import ball_prob
from .spectral import read_matrix_csv

SUBCOMMAND_KINDS = {
    "boundreport": "bound-report",
    "distgrid": "distance-grid",
    "ratefit": "rate-fit",
    "coverage": "coverage",
    "counterexample": "counterexample",
    "anticonc": "anticoncentration",
}


def _global_flags():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="experiment configuration file")
    p.add_argument("--seed", type=int, help="64-bit seed (overrides the config)")
    p.add_argument("--threads", type=int, help="worker threads (default: $HDGAUSS_THREADS or 1)")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--tol", type=float, help="numerical tolerance for CDF evaluations")
    return p


def _grid_flags(p):
    p.add_argument("--n", help="comma-separated sample sizes")
    p.add_argument("--d", help="dimension rule: list, n^g, n or nagaev")
    p.add_argument("--dgp", dest="dgp_kind", help="iid-marginal, nagaev, multiplier or ma-mdep")
    p.add_argument("--marginal")
    p.add_argument("--multiplier")
    p.add_argument("--ma-order", type=int)
    p.add_argument("--samples", type=int, dest="mc_samples", help="Monte Carlo sample count M")
    p.add_argument("--estimator", choices=("independent", "coupled"))


def build_parser():
    glob = _global_flags()
    parser = argparse.ArgumentParser(prog="hdgauss", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("boundreport", parents=[glob], help="error functionals for a dataset or a grid")
    _grid_flags(p)
    p.add_argument("--data", help="binary dataset with JSON sidecar")
    p.add_argument("--sigma", help="target covariance as CSV (default identity)")

    for name, text in [("distgrid", "ball distances over an (n, d) grid"),
                       ("counterexample", "Nagaev half-space gap or multiplier floor")]:
        p = sub.add_parser(name, parents=[glob], help=text)
        _grid_flags(p)

    p = sub.add_parser("ratefit", parents=[glob], help="log-log rate fit of distances")
    _grid_flags(p)
    p.add_argument("--input", help="fit an existing results.csv (columns n, distance) instead")

    p = sub.add_parser("coverage", parents=[glob], help="bootstrap coverage experiment")
    _grid_flags(p)
    p.add_argument("--kind", dest="bootstrap_kind", choices=("efron", "wild"))
    p.add_argument("--alpha", type=float)
    p.add_argument("-B", type=int, dest="bootstrap_b", help="bootstrap resamples per replicate")
    p.add_argument("-R", type=int, dest="replicates", help="outer replicates")
    p.add_argument("--boot-multiplier", dest="bootstrap_multiplier")

    p = sub.add_parser("anticonc", parents=[glob], help="anti-concentration ratios")
    p.add_argument("--dims", help="comma-separated identity dimensions")
    p.add_argument("--eps", help="comma-separated eps factors (times tr/d)")
    p.add_argument("--random-diag", type=int)

    p = sub.add_parser("ballprob", parents=[glob], help="P(|Z + mu| <= r) for Z ~ N(0, sigma)")
    p.add_argument("--sigma", required=True, help="covariance CSV (header dim=d)")
    p.add_argument("--mu", help="comma-separated mean vector (default 0)")
    p.add_argument("-r", "--radius", type=float, required=True)
    return parser


def resolve_threads(flag):
    if flag is not None:
        value = flag
    else:
        env = os.environ.get("HDGAUSS_THREADS")
        try:
            value = int(env) if env else 1
        except ValueError:
            raise ConfigError(f"HDGAUSS_THREADS must be an integer, got {env!r}", None, "threads") from None
    if value < 1:
        raise ConfigError(f"threads must be >= 1, got {value}", None, "threads")
    return value


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def build_config(args):
    kind = SUBCOMMAND_KINDS[args.command]
    if args.config:
        cfg = load_config(args.config)
        if cfg.kind != kind:
            raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {args.command!r}",
                              None, "kind")
    else:
        cfg = ExperimentConfig(kind=kind)
    changes = {"seed": args.seed, "tol": args.tol}
    for name in ("dgp_kind", "marginal", "multiplier", "ma_order", "mc_samples", "estimator",
                 "bootstrap_kind", "alpha", "bootstrap_b", "replicates", "bootstrap_multiplier",
                 "random_diag", "data", "sigma"):
        if hasattr(args, name):
            changes[name] = getattr(args, name)
    if getattr(args, "n", None):
        if not getattr(args, "d", None):
            raise ConfigError("--n needs a --d rule", None, "d")
        ns = [int(v) for v in args.n.split(",") if v.strip()]
        try:
            changes["grid"] = tuple(expand_grid(ns, args.d))
        except ValueError as exc:
            raise ConfigError(str(exc), None, "d") from None
        changes["grid_rule"] = args.d.replace(" ", "")
    if getattr(args, "dims", None):
        changes["dims"] = tuple(int(v) for v in args.dims.split(","))
    if getattr(args, "eps", None):
        changes["eps"] = _floats(args.eps)
    cfg = cfg.with_overrides(**changes)
    return validate(cfg)


def _fit_file(path):
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    pts = [(np.log(float(r["n"])), np.log(float(r["distance"]))) for r in rows if float(r["distance"]) > 0]
    return rate_fit(pts).to_dict()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        threads = resolve_threads(args.threads)
        if args.command == "ballprob":
            sigma = read_matrix_csv(args.sigma)
            mu = None if not args.mu else np.array(_floats(args.mu))
            value, err = ball_prob(sigma, mu, args.radius, tol=args.tol or 1e-8, return_error=True)
            print(json.dumps({"value": value, "errorBound": err}))
            return 0
        if args.command == "ratefit" and args.input:
            print(json.dumps(_fit_file(args.input), indent=2))
            return 0
        cfg = build_config(args)
        out_dir = Path(args.out_dir or cfg.out_dir or Path("results") / cfg.kind)
        for flag in cfg.flags:
            print(f"note: {flag}", file=sys.stderr)
        result = run_experiment(cfg, out_dir, threads=threads)
        summary = {k: v for k, v in result.items() if k != "rows"}
        summary["outDir"] = str(out_dir)
        summary["rows"] = len(result["rows"])
        print(json.dumps(summary, indent=2, default=str))
        return 0
    except ConfigError as exc:
        print(f"hdgauss: configuration error: {exc}", file=sys.stderr)
        return 2
    except HDGaussError as exc:
        print(f"hdgauss: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
