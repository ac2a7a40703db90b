"""Experiment runners behind the command-line interface.

Each run writes into its output directory:

``results.csv``
    the per-kind table (schemas in :data:`CSV_COLUMNS`), floats at 17
    significant digits;
``manifest.json``
    config hash, seed, package version, thread count and wall time;
``plot.svg``
    a log-log chart, for grid experiments;
``error.txt``
    only when the run fails, with the traceback.

Results depend on ``(config, seed)`` only, never on the thread count.
"""

import json
import math
import time
import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import linregress

from . import __version__
from .bootstrap import coverage_experiment
from .bounds import REPORT_KEYS, bound_report
from .data import load_dataset
from .dgp import analytic_var_w, nagaev_sum4, sample
from .exceptions import ConfigError, RankDeficiencyError
from .gaussball import anti_concentration_ratio
from .mc import ball_distance, coupled_ball_distance, halfspace_distance_mc
from .rng import stream
from .spectral import read_matrix_csv
from .svgplot import loglog_svg

NAGAEV_C0 = 1.0 / (8.0 * math.sqrt(14.0 * math.pi))

_REPORT_COLUMNS = tuple(k for k in REPORT_KEYS if k != "constantsNote")

CSV_COLUMNS = {
    "bound-report": ("n", "d") + _REPORT_COLUMNS,
    "distance-grid": ("n", "d", "distance", "stderr", "mc_samples", "rhs_cor3", "ratio"),
    "rate-fit": ("n", "d", "distance", "stderr", "mc_samples", "rhs_cor3", "ratio"),
    "coverage": ("n", "d", "replicate", "norm_w", "quantile", "exceeds"),
    "counterexample": ("n", "d", "statistic", "value", "stderr", "z", "sqrt_sum4", "ratio", "c0"),
    "anticoncentration": ("sigma", "d", "trace", "eps_factor", "eps", "ratio"),
}


@dataclass(frozen=True)
class RateFit:
    points: tuple
    slope: float
    intercept: float
    r2: float
    slope_stderr: float

    def to_dict(self):
        return {"points": [list(p) for p in self.points], "slope": self.slope,
                "intercept": self.intercept, "r2": self.r2, "slopeStderr": self.slope_stderr}


def rate_fit(points):
    """Least squares line through ``(x, y)`` points already on a log scale."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise RankDeficiencyError(f"a rate fit needs at least 3 points, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
        raise RankDeficiencyError("rate fit points must be finite")
    if np.ptp(xs) == 0.0:
        raise RankDeficiencyError("all abscissas are equal; slope is undefined")
    if np.ptp(ys) == 0.0:
        return RateFit(tuple(pts), 0.0, float(ys[0]), 1.0, 0.0)
    fit = linregress(xs, ys)
    return RateFit(tuple(pts), float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2),
                   float(fit.stderr))


def log_points(ns, values):
    return [(math.log(n), math.log(v)) for n, v in zip(ns, values) if v > 0]


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_value(row.get(c)) for c in columns))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def rhs_cor3_value(n, d):
    return n ** -0.125 + (d / n) ** (1 / 6)


def _distance(cfg, spec, index, threads):
    fn = coupled_ball_distance if cfg.estimator == "coupled" else ball_distance
    return fn(spec, cfg.mc_samples, cfg.seed, workers=threads, block_size=cfg.block, key=(index,))


def run_bound_report(cfg, out, threads):
    rows = []
    if cfg.data:
        data = load_dataset(cfg.data)
        sigma = read_matrix_csv(cfg.sigma) if cfg.sigma else np.eye(data.d)
        report = bound_report(data, sigma, ma_order=cfg.ma_order)
        (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
        rows.append({"n": data.n, "d": data.d, **report.to_dict()})
        return rows, {}
    reports = []
    for i, (n, d) in enumerate(cfg.grid):
        spec = cfg.dgp_spec(n, d)
        data = sample(spec, stream(cfg.seed, "bound-report", i))
        report = bound_report(data, analytic_var_w(spec), ma_order=cfg.ma_order)
        reports.append({"n": n, "d": d, **report.to_dict()})
        rows.append({"n": n, "d": d, **report.to_dict()})
    (out / "report.json").write_text(json.dumps(reports, indent=2) + "\n", encoding="utf-8")
    return rows, {}


def run_distance_grid(cfg, out, threads):
    rows = []
    for i, (n, d) in enumerate(cfg.grid):
        est = _distance(cfg, cfg.dgp_spec(n, d), i, threads)
        rhs = rhs_cor3_value(n, d)
        rows.append({"n": n, "d": d, "distance": est.value, "stderr": est.stderr,
                     "mc_samples": est.mc_samples, "rhs_cor3": rhs, "ratio": est.value / rhs})
    ns = [r["n"] for r in rows]
    c = max(r["ratio"] for r in rows)
    svg = loglog_svg({"distance": (ns, [r["distance"] for r in rows]),
                      "c * rhs": (ns, [c * r["rhs_cor3"] for r in rows])},
                     title="centered-ball distance", xlabel="n", ylabel="distance")
    (out / "plot.svg").write_text(svg, encoding="utf-8")
    return rows, {"fitted_c": c}


def run_rate_fit(cfg, out, threads):
    rows, extra = run_distance_grid(cfg, out, threads)
    ns = [r["n"] for r in rows]
    fit = rate_fit(log_points(ns, [r["distance"] for r in rows]))
    rhs_fit = rate_fit(log_points(ns, [r["rhs_cor3"] for r in rows]))
    summary = {"distanceFit": fit.to_dict(), "rhsFit": rhs_fit.to_dict(), "fittedC": extra["fitted_c"]}
    (out / "fit.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return rows, summary


def run_coverage(cfg, out, threads):
    rows = []
    summary = []
    for i, (n, d) in enumerate(cfg.grid):
        res = coverage_experiment(cfg.dgp_spec(n, d), cfg.alpha, cfg.bootstrap_b, cfg.replicates,
                                  cfg.bootstrap_kind, cfg.seed, cfg.bootstrap_multiplier,
                                  workers=threads, key=(i,))
        for r, rep in enumerate(res.replicates):
            rows.append({"n": n, "d": d, "replicate": r, "norm_w": rep.norm_w,
                         "quantile": rep.quantile, "exceeds": bool(rep.exceeds)})
        summary.append({"n": n, "d": d, "kind": cfg.bootstrap_kind, "alpha": cfg.alpha,
                        "coverage": res.coverage, "stderr": res.stderr})
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return rows, {"coverage": summary}


def run_counterexample(cfg, out, threads):
    rows = []
    if cfg.dgp_kind == "nagaev":
        for i, (n, d) in enumerate(cfg.grid):
            est = halfspace_distance_mc(cfg.dgp_spec(n, d), cfg.mc_samples, cfg.seed,
                                        workers=threads, block_size=cfg.block, key=(i,))
            root4 = math.sqrt(nagaev_sum4(n, d))
            rows.append({"n": n, "d": d, "statistic": "halfspace-gap-at-0", "value": est.signed_gap,
                         "stderr": est.stderr, "z": est.signed_gap / est.stderr if est.stderr else None,
                         "sqrt_sum4": root4, "ratio": est.signed_gap / root4, "c0": NAGAEV_C0})
    elif cfg.dgp_kind == "multiplier":
        for i, (n, d) in enumerate(cfg.grid):
            est = ball_distance(cfg.dgp_spec(n, d), cfg.mc_samples, cfg.seed, workers=threads,
                                block_size=cfg.block, key=(i,))
            rows.append({"n": n, "d": d, "statistic": "ball-distance", "value": est.value,
                         "stderr": est.stderr, "z": None, "sqrt_sum4": None, "ratio": None, "c0": None})
    else:
        raise ConfigError("counterexample runs need dgp kind 'nagaev' or 'multiplier'", None, "dgp_kind")
    return rows, {}


def anticonc_sigmas(cfg):
    """Identity matrices for ``cfg.dims`` and ``cfg.random_diag`` random diagonals."""
    out = [(f"identity-{d}", np.eye(d)) for d in cfg.dims]
    for k in range(cfg.random_diag):
        rng = stream(cfg.seed, "anticonc", k)
        diag = rng.uniform(0.25, 4.0, size=5)
        out.append((f"random-diag-{k}", np.diag(diag)))
    return out


def run_anticoncentration(cfg, out, threads):
    rows = []
    for label, sigma in anticonc_sigmas(cfg):
        d = sigma.shape[0]
        tr = float(np.trace(sigma))
        for f in cfg.eps:
            eps = f * tr / d
            ratio = anti_concentration_ratio(sigma, eps=eps, tol=max(cfg.tol, 1e-9))
            rows.append({"sigma": label, "d": d, "trace": tr, "eps_factor": f, "eps": eps, "ratio": ratio})
    return rows, {}


RUNNERS = {
    "bound-report": run_bound_report,
    "distance-grid": run_distance_grid,
    "rate-fit": run_rate_fit,
    "coverage": run_coverage,
    "counterexample": run_counterexample,
    "anticoncentration": run_anticoncentration,
}


def run_experiment(cfg, out_dir, threads=1):
    """Run ``cfg`` and write its files into ``out_dir``; returns the summary dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        rows, extra = RUNNERS[cfg.kind](cfg, out, threads)
        write_csv(out / "results.csv", CSV_COLUMNS[cfg.kind], rows)
    except Exception:
        (out / "error.txt").write_text(traceback.format_exc(), encoding="utf-8")
        raise
    manifest = {
        "kind": cfg.kind,
        "configHash": cfg.config_hash(),
        "seed": cfg.seed,
        "version": __version__,
        "threads": threads,
        "wallTimeSeconds": round(time.perf_counter() - start, 3),
        "flags": list(cfg.flags),
        "config": cfg.semantic_dict(),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return {"rows": rows, **extra}
