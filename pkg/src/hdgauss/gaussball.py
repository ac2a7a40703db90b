"""Probabilities of Euclidean balls under ``N(mu, Sigma)``.

``|Z + mu|^2`` with ``Z ~ N(0, Sigma)`` is a weighted sum of independent
noncentral chi-square(1) variables. Its CDF is computed by inverting the
characteristic function along the real axis (Imhof's integral), with an
explicit split of the error budget between truncation and quadrature.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ._validation import check_positive, check_vector
from .exceptions import ContractError, ConvergenceError, DomainError
from .spectral import kappa as _kappa
from .spectral import sym_eigen, sym_matrix
from .special import chi2_cdf

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_MAX_PANELS = 1 << 16
_SETTLE = 32.0
_CHUNK = 1 << 22


@dataclass(frozen=True, eq=False)
class WeightedChiSquare:
    """Law of ``sum_j weights[j] * (G_j + c_j)^2 + offset``.

    ``noncentralities`` stores ``c_j^2``; ``offset`` is the deterministic
    mass of the mean lying in the null space of the covariance.
    """

    weights: np.ndarray
    noncentralities: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        nc = np.asarray(self.noncentralities, dtype=np.float64).reshape(-1)
        if w.shape != nc.shape:
            raise ContractError("weights and noncentralities must have equal length")
        if np.any(w <= 0) or np.any(nc < 0):
            raise ContractError("weights must be positive and noncentralities nonnegative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "noncentralities", nc)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def mean(self):
        return float(np.sum(self.weights * (1.0 + self.noncentralities)))


def to_weighted_chi2(sigma, mu=None, summary=None):
    """Represent ``|Z + mu|^2`` in the eigenbasis of ``sigma``."""
    sigma = sym_matrix(sigma)
    d = sigma.shape[0]
    mu = np.zeros(d) if mu is None else check_vector(mu, d, "mu")
    s = summary if summary is not None else sym_eigen(sigma)
    if s.eigenvalues[-1] < 0:
        raise DomainError("sigma must be positive semidefinite")
    proj = s.basis.T @ mu
    keep = s.eigenvalues > 0
    lam = s.eigenvalues[keep]
    nc = proj[keep] ** 2 / lam
    offset = float(np.sum(proj[~keep] ** 2))
    return WeightedChiSquare(lam, nc, offset)


def _phase_and_logmod(w, u):
    """Imhof's theta(u) without the ``-x u / 2`` term, and log rho(u)."""
    lu = np.multiply.outer(u, w.weights)
    lu2 = lu * lu
    denom = 1.0 + lu2
    phase = 0.5 * np.sum(np.arctan(lu) + w.noncentralities * lu / denom, axis=-1)
    logmod = 0.25 * np.sum(np.log1p(lu2), axis=-1) + 0.5 * np.sum(w.noncentralities * lu2 / denom, axis=-1)
    return phase, logmod


def _tail_bound(w, u):
    """Imhof's bound on the integral beyond ``u`` (ignores oscillation)."""
    k = 0.5 * w.weights.size
    lu2 = (u * w.weights) ** 2
    log_b = (math.log(math.pi * k) + k * math.log(u) + 0.5 * np.sum(np.log(w.weights))
             + 0.5 * np.sum(w.noncentralities * lu2 / (1.0 + lu2)))
    return math.exp(-log_b)


def _head_integral(w, x, upper, n_panels):
    edges = np.linspace(0.0, upper, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).reshape(-1)
    wts = (half[:, None] * _GL_WEIGHTS[None, :]).reshape(-1)
    phase, logmod = _phase_and_logmod(w, u)
    weighted_amp = wts * np.exp(-logmod) / u
    out = np.empty_like(x)
    step = max(1, _CHUNK // u.size)
    for start in range(0, x.size, step):
        xc = x[start:start + step]
        theta = phase[None, :] - 0.5 * np.outer(xc, u)
        out[start:start + step] = np.sin(theta) @ weighted_amp
    return out


def _scalar_phase_logmod(pairs, u):
    phase = 0.0
    logmod = 0.0
    for lam, nc in pairs:
        lu = lam * u
        lu2 = lu * lu
        denom = 1.0 + lu2
        phase += math.atan(lu) + nc * lu / denom
        logmod += 0.5 * math.log1p(lu2) + nc * lu2 / denom
    return 0.5 * phase, 0.5 * logmod


def _tail_integral(w, x, lower, budget):
    omega = 0.5 * x
    pairs = list(zip(w.weights.tolist(), w.noncentralities.tolist()))

    def g_sin(u):
        phase, logmod = _scalar_phase_logmod(pairs, u)
        return math.sin(phase) * math.exp(-logmod) / u

    def g_cos(u):
        phase, logmod = _scalar_phase_logmod(pairs, u)
        return math.cos(phase) * math.exp(-logmod) / u

    a, ea = quad(g_sin, lower, np.inf, weight="cos", wvar=omega, epsabs=budget / 2, limlst=200)
    b, eb = quad(g_cos, lower, np.inf, weight="sin", wvar=omega, epsabs=budget / 2, limlst=200)
    return a - b, ea + eb


def imhof_cdf(w, x, tol=1e-8, return_error=False):
    """``P(sum_j weights_j (G_j + c_j)^2 <= x)``, the offset not included.

    Accepts scalar or array ``x``. The truncation point is doubled until
    Imhof's tail bound drops below ``tol / 2``; if that needs more than a
    few dozen multiples of ``1 / min(weights)`` the remaining oscillatory
    tail is integrated with a Fourier-weighted quadrature instead. The
    finite part is composite Gauss-Legendre, panel count doubled until two
    successive estimates agree within ``tol / 4``.
    """
    if tol < 1e-9:
        raise ContractError(f"tol must be >= 1e-9, got {tol}")
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.zeros_like(x_arr)
    err = np.zeros_like(x_arr)
    if w.weights.size == 0:
        out = np.where(x_arr >= 0, 1.0, 0.0)
        return _shape(out, err, x, return_error)

    pos = x_arr > 0
    xs = x_arr[pos]
    if xs.size:
        budget = tol * math.pi
        lam_max = float(np.max(w.weights))
        lam_min = float(np.min(w.weights))
        cap = _SETTLE / lam_min
        upper = 1.0 / lam_max
        while _tail_bound(w, upper) > budget / 2 and upper < cap:
            upper *= 2.0
        upper = min(upper, max(cap, 1.0 / lam_max))
        needs_tail = _tail_bound(w, upper) > budget / 2

        rate = 0.5 * (np.sum(w.weights * (1.0 + w.noncentralities)) + float(np.max(xs)))
        width = min(math.pi / rate, 1.0 / lam_max)
        n_panels = max(4, int(math.ceil(upper / width)))
        prev = _head_integral(w, xs, upper, n_panels)
        while True:
            n_panels *= 2
            cur = _head_integral(w, xs, upper, n_panels)
            head_err = np.abs(cur - prev)
            if np.max(head_err) <= budget / 4 or n_panels >= _MAX_PANELS:
                break
            prev = cur
        integral = cur.copy()
        total_err = head_err.copy()
        if needs_tail:
            for i, xi in enumerate(xs):
                val, e = _tail_integral(w, xi, upper, budget / 4)
                integral[i] += val
                total_err[i] += e
        else:
            total_err += _tail_bound(w, upper)

        total_err /= math.pi
        worst = float(np.max(total_err))
        if worst > tol:
            raise ConvergenceError(
                f"Imhof inversion reached error estimate {worst:.3e} > tol {tol:.1e}",
                achieved_error=worst,
            )
        out[pos] = np.clip(0.5 - integral / math.pi, 0.0, 1.0)
        err[pos] = total_err
    return _shape(out, err, x, return_error)


def _shape(out, err, x, return_error):
    if np.ndim(x) == 0:
        out, err = float(out[0]), float(err[0])
    return (out, err) if return_error else out


def _isotropic_scale(sigma):
    diag = np.diag(sigma)
    if np.any(sigma - np.diag(diag)) or np.any(diag != diag[0]):
        return None
    return float(diag[0])


def ball_prob_sq(sigma, mu=None, t=0.0, tol=1e-8, return_error=False):
    """``P(|Z + mu|^2 <= t)`` for ``Z ~ N(0, sigma)``; ``t`` may be an array."""
    sigma = sym_matrix(sigma)
    d = sigma.shape[0]
    mu = np.zeros(d) if mu is None else check_vector(mu, d, "mu")
    t = np.asarray(t, dtype=np.float64)
    scale = _isotropic_scale(sigma)
    if scale is not None and not np.any(mu):
        if scale == 0.0:
            out = np.where(t >= 0, 1.0, 0.0)
        else:
            out = chi2_cdf(d, t / scale)
        out = float(out) if np.ndim(out) == 0 else out
        return (out, 1e-12) if return_error else out
    wcs = to_weighted_chi2(sigma, mu)
    return imhof_cdf(wcs, t - wcs.offset, tol=tol, return_error=return_error)


def ball_prob(sigma, mu=None, r=0.0, tol=1e-8, return_error=False):
    """``P(|Z + mu| <= r)`` for ``Z ~ N(0, sigma)``."""
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0):
        raise DomainError("radius must be nonnegative")
    return ball_prob_sq(sigma, mu, r * r, tol=tol, return_error=return_error)


def squared_norm_cdf(sigma, mu=None, tol=1e-8):
    """Callable ``t -> P(|Z + mu|^2 <= t)`` suitable for KS distances."""
    sigma = sym_matrix(sigma)

    def cdf(t):
        return ball_prob_sq(sigma, mu, t, tol=tol)

    return cdf


def anti_concentration_ratio(sigma, mu=None, eps=0.1, grid_max=None, grid_step=None, tol=1e-9):
    """``max_a P(a <= |Z+mu|^2 <= a+eps) / (kappa(sigma) * eps)`` over a grid.

    The grid runs over ``{0, step, ..., grid_max}`` with default
    ``grid_max = tr(sigma) + 6 Lambda_1(sigma)`` and 400 steps. Raises
    ``RankDeficiencyError`` when ``Lambda_2(sigma) == 0``.
    """
    sigma = sym_matrix(sigma)
    s = sym_eigen(sigma)
    kap = _kappa(s)
    eps = check_positive(eps, "eps")
    if grid_max is None:
        grid_max = s.trace + 6.0 * s.lambda1
    if grid_step is None:
        grid_step = grid_max / 400.0
    grid_max = check_positive(grid_max, "grid_max")
    grid_step = check_positive(grid_step, "grid_step")
    a = np.arange(0.0, grid_max + 0.5 * grid_step, grid_step)
    lower = ball_prob_sq(sigma, mu, a, tol=tol)
    upper = ball_prob_sq(sigma, mu, a + eps, tol=tol)
    mass = np.max(np.asarray(upper) - np.asarray(lower))
    return float(mass / (kap * eps))
