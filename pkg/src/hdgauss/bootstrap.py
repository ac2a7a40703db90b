"""Efron and wild bootstrap for the norm of a normalized sum.

Statistics are on the ``X`` scale: ``W* = n^-1/2 sum_i (X*_i - Xbar)`` for
Efron's bootstrap and ``W = n^-1/2 sum_i e_i X_i`` for the wild one.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import check_alpha, check_data, check_positive_int
from .bounds import sample_covariance
from .data import Dataset
from .dgp import MULTIPLIERS, DgpSpec, draw_multiplier, sample
from .exceptions import ContractError, DataError, DomainError
from .rng import as_generator, check_seed, stream
from .spectral import sym_eigen, sym_matrix

KINDS = ("efron", "wild")


def _raw(X):
    if isinstance(X, Dataset):
        return X.raw()
    return check_data(X)


@dataclass(frozen=True, eq=False)
class BootstrapRun:
    kind: str
    B: int
    alpha: float
    stat_values: np.ndarray
    quantile: float
    multiplier: str | None = None
    seed: int | None = None


def efron_stats(X, B, seed):
    """``|W*|`` for ``B`` resamples of the rows of ``X`` (``n >= 2``)."""
    x = _raw(X)
    n = x.shape[0]
    if n < 2:
        raise DomainError("Efron bootstrap needs n >= 2")
    B = check_positive_int(B, "B")
    rng = as_generator(seed, "efron")
    xc = x - x.mean(axis=0)
    idx = rng.integers(0, n, size=(B, n))
    counts = np.bincount((idx + n * np.arange(B)[:, None]).ravel(), minlength=B * n)
    w = counts.reshape(B, n).astype(np.float64) @ xc / math.sqrt(n)
    return np.sqrt(np.einsum("ij,ij->i", w, w))


def wild_stats(X, B, multiplier, seed):
    """``|n^-1/2 sum_i e_i X_i|`` for ``B`` draws of the multipliers."""
    if multiplier not in MULTIPLIERS:
        raise ContractError(f"unknown multiplier {multiplier!r}; expected one of {tuple(MULTIPLIERS)}")
    x = _raw(X)
    B = check_positive_int(B, "B")
    rng = as_generator(seed, "wild")
    e = draw_multiplier(rng, multiplier, (B, x.shape[0]))
    w = e @ x / math.sqrt(x.shape[0])
    return np.sqrt(np.einsum("ij,ij->i", w, w))


def bootstrap_quantile(values, alpha):
    """Smallest ``v`` among ``values`` with ``#{b : values_b > v} / B <= alpha``."""
    alpha = check_alpha(alpha)
    v = np.sort(np.asarray(values, dtype=np.float64).reshape(-1))
    if v.size == 0:
        raise DataError("bootstrap quantile of an empty sample")
    if np.any(np.isnan(v)):
        raise DataError("bootstrap values contain NaN")
    B = v.size
    # count strictly above each sorted value
    above = B - np.searchsorted(v, v, side="right")
    ok = np.flatnonzero(above <= alpha * B)
    return float(v[ok[0]])


def bootstrap(X, B, alpha, kind="efron", multiplier="gaussian", seed=0):
    """Run one bootstrap and return the statistics with their quantile."""
    alpha = check_alpha(alpha)
    if kind == "efron":
        stats = efron_stats(X, B, seed)
        multiplier = None
    elif kind == "wild":
        stats = wild_stats(X, B, multiplier, seed)
    else:
        raise ContractError(f"kind must be one of {KINDS}, got {kind!r}")
    stats.setflags(write=False)
    return BootstrapRun(kind, int(B), alpha, stats, bootstrap_quantile(stats, alpha), multiplier,
                        None if isinstance(seed, np.random.Generator) else seed)


class CoverageReplicate(NamedTuple):
    norm_w: float
    quantile: float
    exceeds: bool


@dataclass(frozen=True, eq=False)
class CoverageResult:
    coverage: float
    stderr: float
    replicates: list
    kind: str
    alpha: float


def coverage_replicate(X, alpha, B, kind, rng, multiplier="gaussian"):
    """One outer replicate: does ``|W|`` exceed the bootstrap quantile?

    ``W = n^-1/2 sum_i X_i`` with the data assumed centred at the truth.
    The comparison is strict, so ties count as covered.
    """
    x = _raw(X)
    w = x.sum(axis=0) / math.sqrt(x.shape[0])
    norm_w = float(math.sqrt(w @ w))
    run = bootstrap(x, B, alpha, kind, multiplier, rng)
    return CoverageReplicate(norm_w, run.quantile, norm_w > run.quantile)


def coverage_experiment(spec, alpha, B, R, kind="efron", seed=0, multiplier="gaussian", workers=1,
                        key=()):
    """Fraction of ``R`` outer replicates with ``|W| > q(alpha)``.

    Replicate ``r`` draws its data and its bootstrap from the stream
    ``(seed, 'coverage', *key, r)``.
    """
    if not isinstance(spec, DgpSpec):
        raise ContractError("spec must be a DgpSpec")
    alpha = check_alpha(alpha)
    R = check_positive_int(R, "R")
    if R < 100:
        raise DomainError(f"coverage needs R >= 100 outer replicates, got {R}")
    if kind not in KINDS:
        raise ContractError(f"kind must be one of {KINDS}, got {kind!r}")
    seed = check_seed(seed)
    workers = check_positive_int(workers, "workers")

    def one(r):
        rng = stream(seed, "coverage", *key, r)
        data = sample(spec, rng, scale="x-over-sqrt-n")
        return coverage_replicate(data.rows, alpha, B, kind, rng, multiplier)

    if workers == 1:
        reps = [one(r) for r in range(R)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reps = list(pool.map(one, range(R)))
    cov = sum(rep.exceeds for rep in reps) / R
    return CoverageResult(cov, math.sqrt(cov * (1.0 - cov) / R), reps, kind, alpha)


class OpNormDelta(NamedTuple):
    op: float
    hs: float
    hs_bound: float


def op_norm_delta(X, sigma, kind="efron"):
    """``|Sigma_hat - Sigma|_op`` (efron) or ``|Sigma_bar - Sigma|_op`` (wild).

    Also returns the Hilbert-Schmidt norm of the same difference and the
    surrogate ``sqrt(n^-2 sum_i |X_i|^4)``.
    """
    if kind not in KINDS:
        raise ContractError(f"kind must be one of {KINDS}, got {kind!r}")
    x = _raw(X)
    est = sample_covariance(x, centered=(kind == "efron"))
    sigma = sym_matrix(sigma)
    if sigma.shape != est.shape:
        raise ContractError(f"sigma has shape {sigma.shape}, data has d={x.shape[1]}")
    s = sym_eigen(est - sigma)
    norms2 = np.einsum("ij,ij->i", x, x)
    bound = math.sqrt(float(np.sum(norms2 * norms2)) / x.shape[0] ** 2)
    return OpNormDelta(s.op_norm, s.hs_norm, bound)
