"""Regularized lower incomplete gamma and the central chi-square CDF.

Series expansion below ``x < a + 1``, modified-Lentz continued fraction for
the upper tail above it; both are vectorised over ``x`` for a scalar shape.
"""

import math

import numpy as np
from scipy.special import ndtr

from .exceptions import ConvergenceError, DomainError

_EPS = 1e-16
_FPMIN = 1e-300
_MAX_ITER = 100_000


def _stirling_error(a):
    """``lgamma(a) - [(a - 1/2) log a - a + log(2 pi)/2]`` without cancellation."""
    if a < 15.0:
        return math.lgamma(a) - ((a - 0.5) * math.log(a) - a + 0.5 * math.log(2.0 * math.pi))
    inv = 1.0 / a
    inv2 = inv * inv
    return inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 / 1680)))


def _log_prefactor(a, x):
    """``log(x^a e^-x / Gamma(a))``, written around ``x = a`` for large ``a``."""
    if a < 10.0:
        return -x + a * np.log(x) - math.lgamma(a)
    t = (x - a) / a
    return (a * (np.log1p(t) - t) + 0.5 * math.log(a)
            - 0.5 * math.log(2.0 * math.pi) - _stirling_error(a))


def _series(a, x):
    ap = np.full_like(x, a)
    term = 1.0 / ap
    total = term.copy()
    active = np.ones(x.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        ap = ap + 1.0
        term = np.where(active, term * x / ap, 0.0)
        total = total + term
        active = np.abs(term) > np.abs(total) * _EPS
        if not np.any(active):
            break
    else:
        raise ConvergenceError(f"incomplete gamma series did not converge for a={a}")
    return total * np.exp(_log_prefactor(a, x))


def _continued_fraction(a, x):
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = np.where(active, d * c, 1.0)
        h = h * delta
        active = np.abs(delta - 1.0) > _EPS
        if not np.any(active):
            break
    else:
        raise ConvergenceError(f"incomplete gamma continued fraction did not converge for a={a}")
    return np.exp(_log_prefactor(a, x)) * h


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma ``P(a, x)`` for scalar ``a > 0``."""
    if not a > 0:
        raise DomainError(f"shape a must be positive, got {a}")
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(np.isnan(x)):
        raise DomainError("x contains NaN")
    out = np.zeros_like(x)
    pos = x > 0
    low = pos & (x < a + 1.0)
    high = pos & ~low & np.isfinite(x)
    if np.any(low):
        out[low] = _series(a, x[low])
    if np.any(high):
        out[high] = 1.0 - _continued_fraction(a, x[high])
    out[np.isinf(x) & (x > 0)] = 1.0
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def chi2_cdf(d, x):
    """``P(chi^2_d <= x)``; zero for ``x <= 0``."""
    if d <= 0:
        raise DomainError(f"degrees of freedom must be positive, got {d}")
    return gammainc_lower(0.5 * d, 0.5 * np.asarray(x, dtype=np.float64))


def normal_cdf(x):
    out = ndtr(np.asarray(x, dtype=np.float64))
    return float(out) if out.ndim == 0 else out
