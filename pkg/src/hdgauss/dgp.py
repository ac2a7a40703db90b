"""Data-generating processes and exact-law samplers for the sum ``W``.

Four families are available:

``iid-marginal``
    ``xi_i = X_i / sqrt(n)`` with i.i.d. standardized coordinates.
``multiplier``
    ``xi_i = e_i X_i / sqrt(n)`` with Gaussian ``X_i`` (or another marginal)
    and i.i.d. unit-variance multipliers ``e_i``.
``nagaev``
    ``xi_i = n^-1/2 (eta_i, zeta_i1, ..., zeta_i,d-1)`` where ``eta`` is an
    atom at ``x_n`` mixed with a shifted Gaussian.
``ma-mdep``
    moving sums ``sum_{k=0}^m zeta_{i+k}`` of standardized innovations,
    whitened by the exact ``Var(W)`` so the total has identity covariance.

:func:`sample` materialises the ``n x d`` summands. :func:`sample_w`
draws ``W`` directly from its law, which is what the Monte Carlo distance
estimates need; every fast path is either exact in law or (for sums of
uniforms) exact to about ``1e-7`` in CDF, and falls back to summing a
materialised dataset otherwise.
"""

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import gammaincinv, ndtr, ndtri

from ._validation import check_positive_int
from .data import Dataset
from .exceptions import ContractError, DomainError
from .rng import as_generator
from .spectral import whiten

KINDS = ("iid-marginal", "nagaev", "multiplier", "ma-mdep")
MARGINALS = ("gaussian", "rademacher", "uniform-std", "exp-std")
MULTIPLIERS = {"gaussian": 2.0, "rademacher": 0.0, "mammen": 1.0}

_SQRT5 = math.sqrt(5.0)
MAMMEN_VALUES = ((1.0 - _SQRT5) / 2.0, (1.0 + _SQRT5) / 2.0)
MAMMEN_PROBS = ((_SQRT5 + 1.0) / (2.0 * _SQRT5), (_SQRT5 - 1.0) / (2.0 * _SQRT5))

# below this many summands the uniform-sum table is not worth building
_TABLE_MIN_N = 64


class NagaevParams(NamedTuple):
    x: float
    p: float
    a: float
    sigma: float


@dataclass(frozen=True)
class DgpSpec:
    kind: str
    n: int
    d: int
    marginal: str = "gaussian"
    multiplier: str = "gaussian"
    var_esq: float | None = None
    ma_order: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown dgp kind {self.kind!r}; expected one of {KINDS}")
        check_positive_int(self.n, "n")
        check_positive_int(self.d, "d")
        if self.marginal not in MARGINALS:
            raise ContractError(f"unknown marginal {self.marginal!r}; expected one of {MARGINALS}")
        if self.multiplier not in MULTIPLIERS:
            raise ContractError(f"unknown multiplier {self.multiplier!r}; expected one of {tuple(MULTIPLIERS)}")
        expected = MULTIPLIERS[self.multiplier]
        if self.var_esq is None:
            object.__setattr__(self, "var_esq", expected)
        elif not math.isclose(float(self.var_esq), expected, rel_tol=1e-12, abs_tol=1e-12):
            raise ContractError(
                f"var_esq={self.var_esq} inconsistent with {self.multiplier} multipliers (Var(e^2)={expected})")
        check_positive_int(self.ma_order, "ma_order", minimum=0)
        if self.kind == "ma-mdep" and self.n <= self.ma_order:
            raise ContractError(f"ma-mdep needs n > ma_order, got n={self.n}, m={self.ma_order}")
        if self.kind == "nagaev":
            nagaev_params(self.n)

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        fields = self.to_dict()
        fields.update(changes)
        if "multiplier" in changes and "var_esq" not in changes:
            fields["var_esq"] = None
        return DgpSpec(**fields)


def nagaev_params(n):
    """Solve ``x = sqrt(n)/ln n``, ``p x = a (1-p)``, ``p x^2 = 1/2``,
    ``1/2 + (sigma^2 + a^2)(1-p) = 1``."""
    n = check_positive_int(n, "n")
    if n < 3:
        raise DomainError(f"the Nagaev mixture needs n >= 3, got {n}")
    x = math.sqrt(n) / math.log(n)
    p = 0.5 / (x * x)
    if p >= 1.0:
        raise DomainError(f"n={n} is too small: atom probability {p:.3f} >= 1")
    a = p * x / (1.0 - p)
    var = 0.5 / (1.0 - p) - a * a
    if var <= 0.0:
        raise DomainError(f"n={n} is too small: sigma_n^2 = {var:.3e} <= 0")
    return NagaevParams(x, p, a, math.sqrt(var))


def nagaev_moments(params):
    """``(E eta, E eta^2, E eta^3, E eta^4)`` in closed form."""
    x, p, a, s = params
    q = 1.0 - p
    # moments of sigma G - a
    m1 = -a
    m2 = s * s + a * a
    m3 = -(a ** 3) - 3.0 * a * s * s
    m4 = a ** 4 + 6.0 * a * a * s * s + 3.0 * s ** 4
    return (p * x + q * m1, p * x ** 2 + q * m2, p * x ** 3 + q * m3, p * x ** 4 + q * m4)


def nagaev_sum4(n, d):
    """Exact ``sum_i E|xi_i|^4`` for the Nagaev summands."""
    eta4 = nagaev_moments(nagaev_params(n))[3]
    k = d - 1
    return (eta4 + 2.0 * k + k * (k + 2.0)) / n


def draw_marginal(rng, marginal, shape):
    if marginal == "gaussian":
        return rng.standard_normal(shape)
    if marginal == "rademacher":
        return 2.0 * rng.integers(0, 2, size=shape).astype(np.float64) - 1.0
    if marginal == "uniform-std":
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=shape)
    if marginal == "exp-std":
        return rng.standard_exponential(shape) - 1.0
    raise ContractError(f"unknown marginal {marginal!r}")


def draw_multiplier(rng, kind, shape):
    if kind == "gaussian":
        return rng.standard_normal(shape)
    if kind == "rademacher":
        return 2.0 * rng.integers(0, 2, size=shape).astype(np.float64) - 1.0
    if kind == "mammen":
        hi = rng.random(shape) < MAMMEN_PROBS[1]
        return np.where(hi, MAMMEN_VALUES[1], MAMMEN_VALUES[0])
    raise ContractError(f"unknown multiplier {kind!r}")


def draw_eta(rng, params, size):
    atom = rng.random(size) < params.p
    cont = params.sigma * rng.standard_normal(size) - params.a
    return np.where(atom, params.x, cont)


def ma_multiplicities(n, m):
    """How many of the ``n`` moving sums contain innovation ``t`` (``t < n + m``)."""
    t = np.arange(n + m)
    lo = np.maximum(0, t - m)
    hi = np.minimum(n - 1, t)
    return (hi - lo + 1).astype(np.float64)


def ma_var_w(n, m, d):
    """Exact ``Var(sum_i xi_i)`` of the unwhitened MA(m) sums."""
    c = ma_multiplicities(n, m)
    return float(np.sum(c * c)) * np.eye(d)


def analytic_var_w(spec):
    """``Var(W)`` of the generated sum; identity for every family here."""
    return np.eye(spec.d)


def sample(spec, seed, scale="raw-xi"):
    """Draw one dataset of ``n`` summands in ``R^d``.

    ``seed`` may be an integer or a ``numpy.random.Generator``. With
    ``scale='x-over-sqrt-n'`` the rows are ``X_i = sqrt(n) xi_i``.
    """
    rng = as_generator(seed, "dataset")
    n, d = spec.n, spec.d
    inv_root_n = 1.0 / math.sqrt(n)
    if spec.kind == "iid-marginal":
        x = draw_marginal(rng, spec.marginal, (n, d))
    elif spec.kind == "multiplier":
        base = draw_marginal(rng, spec.marginal, (n, d))
        e = draw_multiplier(rng, spec.multiplier, n)
        x = e[:, None] * base
    elif spec.kind == "nagaev":
        eta = draw_eta(rng, nagaev_params(n), n)
        zeta = rng.standard_normal((n, d - 1))
        x = np.column_stack([eta, zeta])
    else:
        m = spec.ma_order
        innov = draw_marginal(rng, spec.marginal, (n + m, d))
        sums = innov[:n].copy()
        for k in range(1, m + 1):
            sums += innov[k:k + n]
        xi = whiten(Dataset(sums), ma_var_w(n, m, d)).rows
        if scale == "raw-xi":
            return Dataset(xi, "raw-xi", spec=spec.to_dict(), seed=_seed_of(seed))
        return Dataset(xi * math.sqrt(n), scale, spec=spec.to_dict(), seed=_seed_of(seed))

    if scale == "raw-xi":
        return Dataset(x * inv_root_n, "raw-xi", spec=spec.to_dict(), seed=_seed_of(seed))
    return Dataset(x, scale, spec=spec.to_dict(), seed=_seed_of(seed))


def _seed_of(seed):
    return None if isinstance(seed, np.random.Generator) else int(seed)


@lru_cache(maxsize=32)
def _uniform_sum_table(n):
    """CDF of ``n^-1/2 sum_i U_i`` (``U_i`` uniform, unit variance) on a grid.

    Gil-Pelaez inversion of ``(sin(b t) / (b t))^n`` with ``b = sqrt(3/n)``.
    """
    b = math.sqrt(3.0 / n)
    nodes, weights = np.polynomial.legendre.leggauss(800)
    top = 12.0
    t = 0.5 * top * (nodes + 1.0)
    w = 0.5 * top * weights
    cf = np.power(np.sinc(b * t / math.pi), n)
    grid = np.linspace(-8.5, 8.5, 8001)
    cdf = 0.5 + (np.sin(np.outer(grid, t)) @ (w * cf / t)) / math.pi
    cdf = np.maximum.accumulate(np.clip(cdf, 0.0, 1.0))
    grid.setflags(write=False)
    cdf.setflags(write=False)
    return grid, cdf


def _coordinate_sums(rng, spec, shape):
    """Draws of ``n^-1/2 sum_i X_ij`` for i.i.d. standardized ``X_ij``."""
    n = spec.n
    root = math.sqrt(n)
    if spec.marginal == "gaussian":
        return rng.standard_normal(shape)
    if spec.marginal == "rademacher":
        return (2.0 * rng.binomial(n, 0.5, size=shape) - n) / root
    if spec.marginal == "exp-std":
        return (rng.standard_gamma(float(n), size=shape) - n) / root
    if n >= _TABLE_MIN_N:
        grid, cdf = _uniform_sum_table(n)
        return np.interp(rng.random(shape), cdf, grid)
    return None


@lru_cache(maxsize=32)
def _binomial_half_cdf(n):
    from scipy.stats import binom

    cdf = binom.cdf(np.arange(n + 1), n, 0.5)
    cdf[-1] = 1.0
    cdf.setflags(write=False)
    return cdf


def coordinate_sum_quantile(spec, u):
    """Quantile function of ``n^-1/2 sum_i X_ij`` for the ``iid-marginal`` family.

    Used to couple ``W`` with a Gaussian vector through common uniforms.
    """
    if spec.kind != "iid-marginal":
        raise ContractError("quantile coupling is only available for iid-marginal data")
    n = spec.n
    root = math.sqrt(n)
    u = np.asarray(u, dtype=np.float64)
    if spec.marginal == "gaussian":
        return ndtri(u)
    if spec.marginal == "rademacher":
        k = np.searchsorted(_binomial_half_cdf(n), u, side="left")
        return (2.0 * k - n) / root
    if spec.marginal == "exp-std":
        return (gammaincinv(float(n), u) - n) / root
    if n < _TABLE_MIN_N:
        raise ContractError(f"uniform-std coupling needs n >= {_TABLE_MIN_N}, got {n}")
    grid, cdf = _uniform_sum_table(n)
    return np.interp(u, cdf, grid)


def sample_w_coupled(spec, rng, count):
    """Pairs ``(W, Z)`` sharing uniforms coordinate by coordinate."""
    z = rng.standard_normal((count, spec.d))
    if spec.kind == "iid-marginal" and spec.marginal == "gaussian":
        return z.copy(), z
    return coordinate_sum_quantile(spec, ndtr(z)), z


def sample_w(spec, rng, count):
    """``count`` independent draws of ``W`` as a ``(count, d)`` array."""
    n, d = spec.n, spec.d
    if spec.kind == "iid-marginal":
        out = _coordinate_sums(rng, spec, (count, d))
        if out is not None:
            return out
    elif spec.kind == "multiplier" and spec.marginal == "gaussian":
        e = draw_multiplier(rng, spec.multiplier, (count, n))
        v = np.mean(e * e, axis=1)
        return np.sqrt(v)[:, None] * rng.standard_normal((count, d))
    elif spec.kind == "nagaev":
        par = nagaev_params(n)
        k = rng.binomial(n, par.p, size=count)
        rest = n - k
        g = rng.standard_normal(count)
        first = (par.x * k - par.a * rest + par.sigma * np.sqrt(rest) * g) / math.sqrt(n)
        return np.column_stack([first, rng.standard_normal((count, d - 1))])
    elif spec.kind == "ma-mdep" and spec.marginal == "gaussian":
        return rng.standard_normal((count, d))
    return sample_w_materialized(spec, rng, count)


def sample_w_materialized(spec, rng, count):
    """Reference path: build each dataset and sum its rows."""
    out = np.empty((count, spec.d))
    for r in range(count):
        out[r] = sample(spec, rng).total()
    return out


def sample_w_sq_norms(spec, rng, count):
    """``count`` draws of ``|W|^2``."""
    if spec.kind == "multiplier" and spec.marginal == "gaussian":
        e = draw_multiplier(rng, spec.multiplier, (count, spec.n))
        v = np.mean(e * e, axis=1)
        return v * rng.chisquare(spec.d, size=count)
    w = sample_w(spec, rng, count)
    return np.einsum("ij,ij->i", w, w)
