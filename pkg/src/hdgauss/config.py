"""Experiment configuration: a line-oriented ``key = value`` format.

Example::

    [experiment]
    kind = distance-grid
    seed = 7

    [grid]
    n = 256, 512, 1024
    d = n^0.75

    [dgp]
    kind = iid-marginal
    marginal = rademacher

    [mc]
    samples = 100000

Blank lines and lines starting with ``#`` or ``;`` are ignored, as is
anything after `` #`` on a value line. Every key must sit inside a known
section and unknown keys are rejected with their line number.

Grid rules for ``d``: an integer list (one per ``n``, or a single value
for all), ``n^g`` for ``floor(n^g)``, ``n`` for ``d = n``, or ``nagaev``
for ``floor(sqrt(n) / ln n)``.
"""

import hashlib
import json
import math
import re
from dataclasses import asdict, dataclass, field, replace

from .dgp import KINDS as DGP_KINDS
from .dgp import MARGINALS, MULTIPLIERS, DgpSpec
from .exceptions import ConfigError, HDGaussError

EXPERIMENT_KINDS = ("bound-report", "distance-grid", "rate-fit", "coverage",
                    "counterexample", "anticoncentration")
ESTIMATORS = ("independent", "coupled")

_SCHEMA = {
    "experiment": {"kind", "seed", "out_dir"},
    "grid": {"n", "d"},
    "dgp": {"kind", "marginal", "multiplier", "ma_order"},
    "mc": {"samples", "tol", "estimator", "block"},
    "bootstrap": {"kind", "b", "alpha", "replicates", "multiplier"},
    "anticonc": {"dims", "random_diag", "eps", "small_eps"},
    "input": {"data", "sigma"},
}

_NAGAEV_RULE = "nagaev"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int = 0
    out_dir: str | None = None
    grid: tuple = ()
    grid_rule: str = ""
    dgp_kind: str = "iid-marginal"
    marginal: str = "gaussian"
    multiplier: str = "gaussian"
    ma_order: int = 0
    mc_samples: int = 100_000
    tol: float = 1e-8
    estimator: str = "independent"
    block: int = 8192
    bootstrap_kind: str = "efron"
    bootstrap_b: int = 500
    alpha: float = 0.1
    replicates: int = 2000
    bootstrap_multiplier: str = "gaussian"
    dims: tuple = (2, 5, 20, 100)
    random_diag: int = 3
    eps: tuple = (0.05, 0.1, 0.2)
    small_eps: float = 0.01
    data: str | None = None
    sigma: str | None = None
    flags: tuple = field(default=(), compare=False)

    def dgp_spec(self, n, d):
        return DgpSpec(self.dgp_kind, n, d, marginal=self.marginal, multiplier=self.multiplier,
                       ma_order=self.ma_order)

    def semantic_dict(self):
        """Fields that determine the results (not where they are written)."""
        out = asdict(self)
        out.pop("out_dir")
        out.pop("flags")
        out["grid"] = [list(p) for p in self.grid]
        out["dims"] = list(self.dims)
        out["eps"] = list(self.eps)
        return out

    def config_hash(self):
        blob = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def with_overrides(self, **changes):
        changes = {k: v for k, v in changes.items() if v is not None}
        return validate(replace(self, **changes))


def _int(text, key, line):
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {text!r}", line, key) from None
    return value


def _float(text, key, line):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {text!r}", line, key) from None
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite", line, key)
    return value


def _list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def expand_grid(ns, d_rule):
    """Pair each ``n`` with its ``d`` under ``d_rule`` (see module docstring)."""
    rule = d_rule.replace(" ", "")
    if rule == "n":
        return [(n, n) for n in ns]
    if rule == _NAGAEV_RULE:
        return [(n, max(1, int(math.floor(math.sqrt(n) / math.log(n) + 1e-9)))) for n in ns]
    match = re.fullmatch(r"n\^([0-9]*\.?[0-9]+)", rule)
    if match:
        g = float(match.group(1))
        return [(n, max(1, int(math.floor(n ** g + 1e-9)))) for n in ns]
    ds = [int(v) for v in _list(rule)]
    if len(ds) == 1:
        ds = ds * len(ns)
    if len(ds) != len(ns):
        raise ValueError(f"d list has {len(ds)} entries for {len(ns)} values of n")
    return list(zip(ns, ds))


def parse_config(text):
    """Parse and validate configuration text into an :class:`ExperimentConfig`."""
    values = {}
    lines = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno)
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno, section)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        value = re.split(r"\s#", value, maxsplit=1)[0].strip()
        if section is None:
            raise ConfigError(f"key {key!r} appears before any [section]", lineno, key)
        if key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno, key)
        if (section, key) in values:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno, key)
        if not value:
            raise ConfigError(f"empty value for {key!r}", lineno, key)
        values[(section, key)] = value
        lines[(section, key)] = lineno

    def get(section, key):
        return values.get((section, key)), lines.get((section, key))

    kw = {}
    kind, ln = get("experiment", "kind")
    if kind is None:
        raise ConfigError("missing [experiment] kind", None, "kind")
    kw["kind"] = kind

    for (sec, key), name, conv in [
        (("experiment", "seed"), "seed", _int),
        (("dgp", "ma_order"), "ma_order", _int),
        (("mc", "samples"), "mc_samples", _int),
        (("mc", "tol"), "tol", _float),
        (("mc", "block"), "block", _int),
        (("bootstrap", "b"), "bootstrap_b", _int),
        (("bootstrap", "alpha"), "alpha", _float),
        (("bootstrap", "replicates"), "replicates", _int),
        (("anticonc", "random_diag"), "random_diag", _int),
        (("anticonc", "small_eps"), "small_eps", _float),
    ]:
        value, ln = get(sec, key)
        if value is not None:
            kw[name] = conv(value, key, ln)

    for (sec, key), name in [
        (("experiment", "out_dir"), "out_dir"),
        (("dgp", "kind"), "dgp_kind"),
        (("dgp", "marginal"), "marginal"),
        (("dgp", "multiplier"), "multiplier"),
        (("mc", "estimator"), "estimator"),
        (("bootstrap", "kind"), "bootstrap_kind"),
        (("bootstrap", "multiplier"), "bootstrap_multiplier"),
        (("input", "data"), "data"),
        (("input", "sigma"), "sigma"),
    ]:
        value, _ = get(sec, key)
        if value is not None:
            kw[name] = value

    value, ln = get("anticonc", "dims")
    if value is not None:
        kw["dims"] = tuple(_int(v, "dims", ln) for v in _list(value))
    value, ln = get("anticonc", "eps")
    if value is not None:
        kw["eps"] = tuple(_float(v, "eps", ln) for v in _list(value))

    n_text, n_line = get("grid", "n")
    d_text, d_line = get("grid", "d")
    if n_text is not None:
        ns = [_int(v, "n", n_line) for v in _list(n_text)]
        if d_text is None:
            raise ConfigError("[grid] has n but no d rule", n_line, "d")
        try:
            kw["grid"] = tuple(expand_grid(ns, d_text))
        except ValueError as exc:
            raise ConfigError(str(exc), d_line, "d") from None
        kw["grid_rule"] = d_text.replace(" ", "")
    elif d_text is not None:
        raise ConfigError("[grid] has a d rule but no n list", d_line, "n")

    try:
        return validate(ExperimentConfig(**kw))
    except ConfigError as exc:
        field_name = exc.field
        line = None
        for (sec, key), ln in lines.items():
            if key == field_name or _FIELD_KEYS.get(field_name) == (sec, key):
                line = ln
                break
        if line is not None and exc.line is None:
            raise ConfigError(str(exc), line, field_name) from None
        raise


_FIELD_KEYS = {
    "kind": ("experiment", "kind"),
    "seed": ("experiment", "seed"),
    "dgp_kind": ("dgp", "kind"),
    "marginal": ("dgp", "marginal"),
    "multiplier": ("dgp", "multiplier"),
    "ma_order": ("dgp", "ma_order"),
    "mc_samples": ("mc", "samples"),
    "tol": ("mc", "tol"),
    "estimator": ("mc", "estimator"),
    "block": ("mc", "block"),
    "bootstrap_kind": ("bootstrap", "kind"),
    "bootstrap_b": ("bootstrap", "b"),
    "alpha": ("bootstrap", "alpha"),
    "replicates": ("bootstrap", "replicates"),
    "bootstrap_multiplier": ("bootstrap", "multiplier"),
    "grid": ("grid", "n"),
}


def _require(cond, message, field_name):
    if not cond:
        raise ConfigError(message, None, field_name)


def validate(cfg):
    """Semantic checks; returns ``cfg`` with ``flags`` filled in."""
    _require(cfg.kind in EXPERIMENT_KINDS, f"kind must be one of {EXPERIMENT_KINDS}, got {cfg.kind!r}", "kind")
    _require(isinstance(cfg.seed, int) and 0 <= cfg.seed < 2 ** 64, "seed must be a 64-bit unsigned integer", "seed")
    _require(cfg.dgp_kind in DGP_KINDS, f"dgp kind must be one of {DGP_KINDS}", "dgp_kind")
    _require(cfg.marginal in MARGINALS, f"marginal must be one of {MARGINALS}", "marginal")
    _require(cfg.multiplier in MULTIPLIERS, f"multiplier must be one of {tuple(MULTIPLIERS)}", "multiplier")
    _require(cfg.bootstrap_multiplier in MULTIPLIERS,
             f"bootstrap multiplier must be one of {tuple(MULTIPLIERS)}", "bootstrap_multiplier")
    _require(cfg.ma_order >= 0, "ma_order must be >= 0", "ma_order")
    _require(cfg.mc_samples >= 1, "samples must be >= 1", "mc_samples")
    _require(cfg.block >= 1, "block must be >= 1", "block")
    _require(cfg.tol >= 1e-9, "tol must be >= 1e-9", "tol")
    _require(cfg.estimator in ESTIMATORS, f"estimator must be one of {ESTIMATORS}", "estimator")
    _require(cfg.bootstrap_kind in ("efron", "wild"), "bootstrap kind must be efron or wild", "bootstrap_kind")
    _require(cfg.bootstrap_b >= 1, "B must be >= 1", "bootstrap_b")
    _require(0.0 < cfg.alpha < 1.0, "alpha must lie in (0, 1)", "alpha")
    _require(all(d >= 2 for d in cfg.dims), "anticoncentration dims must be >= 2", "dims")
    _require(all(e > 0 for e in cfg.eps) and cfg.eps, "eps factors must be positive", "eps")

    needs_grid = cfg.kind != "anticoncentration" and not (cfg.kind == "bound-report" and cfg.data)
    _require(not needs_grid or len(cfg.grid) > 0, "grid must be nonempty", "grid")
    _require(all(n >= 1 and d >= 1 for n, d in cfg.grid), "grid entries must be positive", "grid")
    if cfg.kind == "rate-fit":
        _require(len(cfg.grid) >= 3, "rate-fit needs at least 3 grid points", "grid")
    if cfg.kind == "coverage":
        _require(cfg.replicates >= 100, "coverage needs replicates >= 100", "replicates")
    flags = tuple(f"d={d} >= n={n}: dimension at or above sample size" for n, d in cfg.grid if d >= n)
    try:
        for n, d in cfg.grid:
            cfg.dgp_spec(n, d)
    except HDGaussError as exc:
        raise ConfigError(str(exc), None, "grid") from None
    return replace(cfg, flags=flags)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
