"""Deterministic replicated Monte Carlo and Kolmogorov-type distances.

Replicates are processed in fixed-size blocks; block ``b`` draws from the
stream ``(seed, tag, b)``. A replicate's value therefore depends only on
``(seed, tag, index, block_size)`` and the output order is the replicate
order, whatever the number of worker threads.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._validation import check_positive_int, check_vector
from .dgp import DgpSpec, sample_w, sample_w_coupled, sample_w_sq_norms
from .exceptions import ContractError, DataError
from .rng import check_seed, stream
from .special import chi2_cdf, normal_cdf

FAMILIES = ("centered-balls", "half-space")
KS_BAND_95 = 1.36
KS_BAND_99 = 1.63
DEFAULT_BLOCK = 8192


@dataclass(frozen=True)
class DistanceEstimate:
    """A Monte Carlo distance with its sample count and error scale.

    For ``centered-balls`` the ``stderr`` is the 95% KS null band
    ``1.36 / sqrt(M)``. For ``half-space`` it is the binomial standard error
    of the signed gap at zero.
    """

    value: float
    family: str
    mc_samples: int
    stderr: float
    dgp: dict | None = None
    seed: int | None = None
    signed_gap: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ContractError(f"unknown distance family {self.family!r}")
        if not 0.0 <= self.value <= 1.0:
            raise ContractError(f"distance must lie in [0, 1], got {self.value}")

    def to_dict(self):
        return {
            "value": self.value,
            "family": self.family,
            "mcSamples": self.mc_samples,
            "stderr": self.stderr,
            "dgp": self.dgp,
            "seed": self.seed,
            "signedGap": self.signed_gap,
        }


def resolve_workers(workers):
    return check_positive_int(workers, "workers")


def _tag(tag):
    return tag if isinstance(tag, tuple) else (tag,)


def _blocks(count, block_size):
    return [(start, min(block_size, count - start)) for start in range(0, count, block_size)]


def run_replicated(fn, count, seed, workers=1, block_size=DEFAULT_BLOCK, tag="replicate"):
    """Yield ``fn``'s per-replicate values in replicate order.

    ``fn(rng, size)`` must return an array whose first axis has length
    ``size``. ``count == 0`` yields nothing.
    """
    count = check_positive_int(count, "count", minimum=0)
    workers = resolve_workers(workers)
    block_size = check_positive_int(block_size, "block_size")
    seed = check_seed(seed)
    blocks = _blocks(count, block_size)

    def one(index):
        size = blocks[index][1]
        out = np.asarray(fn(stream(seed, *_tag(tag), index), size))
        if out.shape[:1] != (size,):
            raise ContractError(f"replicate function returned shape {out.shape} for a block of {size}")
        return out

    if workers == 1 or len(blocks) <= 1:
        for b in range(len(blocks)):
            yield from one(b)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for block in pool.map(one, range(len(blocks))):
            yield from block


def replicate_array(fn, count, seed, workers=1, block_size=DEFAULT_BLOCK, tag="replicate"):
    """:func:`run_replicated` gathered into one array."""
    count = check_positive_int(count, "count", minimum=0)
    workers = resolve_workers(workers)
    seed = check_seed(seed)
    blocks = _blocks(count, check_positive_int(block_size, "block_size"))
    if not blocks:
        return np.empty(0)

    def one(index):
        return np.asarray(fn(stream(seed, *_tag(tag), index), blocks[index][1]))

    if workers == 1:
        parts = [one(b) for b in range(len(blocks))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(len(blocks))))
    return np.concatenate(parts)


def ks_statistic(samples, cdf):
    """One-sample Kolmogorov statistic of ``samples`` against ``cdf``."""
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise DataError("need at least one sample")
    if np.any(np.isnan(x)):
        raise DataError("samples contain NaN")
    x = np.sort(x)
    f = np.asarray(cdf(x), dtype=np.float64).reshape(-1)
    m = x.size
    i = np.arange(1, m + 1)
    return float(np.max(np.maximum(i / m - f, f - (i - 1) / m)))


def ks_ball_distance(w_sq, cdf, dgp=None, seed=None):
    """Distance over centered balls from draws of ``|W|^2``."""
    value = min(1.0, max(0.0, ks_statistic(w_sq, cdf)))
    m = np.asarray(w_sq).size
    return DistanceEstimate(value, "centered-balls", m, KS_BAND_95 / math.sqrt(m), dgp, seed)


def ks_bootstrap_interval(samples, cdf, n_boot=200, level=0.95, seed=0):
    """Percentile interval for the KS statistic by resampling the draws.

    Useful when the true distance is positive and the null band says little.
    """
    x = np.asarray(samples, dtype=np.float64).reshape(-1)
    rng = stream(seed, "ks-bootstrap")
    stats = np.array([ks_statistic(rng.choice(x, x.size), cdf) for _ in range(n_boot)])
    lo, hi = np.quantile(stats, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def halfspace_distance(w, direction, scale=1.0, dgp=None, seed=None):
    """Half-space distance along ``direction`` from an ``(M, d)`` array of ``W``.

    ``scale`` is the exact Gaussian standard deviation of ``<W, direction>``.
    Also records the signed gap ``P(<W, u> < 0) - 1/2``.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2:
        raise DataError("W draws must be a 2-D array")
    u = check_vector(direction, w.shape[1], "direction")
    if not math.isclose(float(u @ u), 1.0, rel_tol=1e-9):
        raise ContractError("direction must be a unit vector")
    proj = w @ u
    value = ks_statistic(proj, lambda t: normal_cdf(t / scale))
    m = proj.size
    below = float(np.mean(proj < 0.0))
    stderr = math.sqrt(max(below * (1.0 - below), 0.0) / m)
    return DistanceEstimate(min(1.0, value), "half-space", m, stderr, dgp, seed, below - 0.5)


def ball_distance(spec, mc_samples, seed, workers=1, block_size=DEFAULT_BLOCK, key=()):
    """Monte Carlo distance over centered balls between ``W`` and ``N(0, I_d)``."""
    if not isinstance(spec, DgpSpec):
        raise ContractError("spec must be a DgpSpec")
    mc_samples = check_positive_int(mc_samples, "mc_samples")
    w_sq = replicate_array(lambda rng, k: sample_w_sq_norms(spec, rng, k),
                           mc_samples, seed, workers, block_size, tag=("ball-distance", *key))
    return ks_ball_distance(w_sq, lambda t: chi2_cdf(spec.d, t), spec.to_dict(), seed)


def halfspace_distance_mc(spec, mc_samples, seed, direction=None, workers=1, block_size=DEFAULT_BLOCK,
                          key=()):
    """Half-space distance for the generated ``W`` (default direction ``e_1``)."""
    mc_samples = check_positive_int(mc_samples, "mc_samples")
    if direction is None:
        direction = np.eye(spec.d)[0]
    u = check_vector(direction, spec.d, "direction")
    proj = replicate_array(lambda rng, k: sample_w(spec, rng, k) @ u,
                           mc_samples, seed, workers, block_size, tag=("halfspace", *key))
    return halfspace_distance(proj[:, None], [1.0], 1.0, spec.to_dict(), seed)


def coupled_ks(a, b):
    """``sup_r |F_a(r) - F_b(r)|`` for two equal-size samples, with the
    variance of the indicator difference at the maximiser.

    ``a[i]`` and ``b[i]`` are meant to be coupled draws; the statistic is
    the two-sample KS distance, ties handled by evaluating at the end of
    each tie group.
    """
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.size != b.size or a.size == 0:
        raise DataError("coupled samples must be non-empty and of equal size")
    if np.any(np.isnan(a)) or np.any(np.isnan(b)):
        raise DataError("samples contain NaN")
    m = a.size
    values = np.concatenate([a, b])
    steps = np.concatenate([np.full(m, 1.0 / m), np.full(m, -1.0 / m)])
    order = np.argsort(values, kind="stable")
    values = values[order]
    diff = np.cumsum(steps[order])
    ends = np.flatnonzero(np.append(values[1:] != values[:-1], True))
    k = ends[np.argmax(np.abs(diff[ends]))]
    r = values[k]
    disagree = (a <= r).astype(np.float64) - (b <= r)
    stat = float(abs(diff[k]))
    var = max(float(np.mean(disagree * disagree)) - stat * stat, 0.0)
    return stat, math.sqrt(var / m)


def coupled_ball_distance(spec, mc_samples, seed, workers=1, block_size=DEFAULT_BLOCK, key=()):
    """Ball distance estimated with common random numbers.

    ``W`` and ``Z ~ N(0, I_d)`` are built from the same uniforms, so the
    difference of their empirical CDFs has far smaller variance than a
    comparison of ``W`` alone against the chi-square CDF. The reported
    ``stderr`` is the standard error of the CDF difference at the maximiser.
    """
    mc_samples = check_positive_int(mc_samples, "mc_samples")

    def block(rng, k):
        w, z = sample_w_coupled(spec, rng, k)
        return np.column_stack([np.einsum("ij,ij->i", w, w), np.einsum("ij,ij->i", z, z)])

    pairs = replicate_array(block, mc_samples, seed, workers, block_size, tag=("coupled-ball", *key))
    stat, stderr = coupled_ks(pairs[:, 0], pairs[:, 1])
    return DistanceEstimate(min(1.0, stat), "centered-balls", mc_samples, stderr, spec.to_dict(), seed)
