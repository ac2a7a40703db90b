"""Error functionals for Gaussian approximation of ``W = sum_i xi_i``.

Every assembled right-hand side omits the unspecified absolute constant
``C``: values are shapes to compare across ``n`` and ``d``, never absolute
error guarantees. Inputs come either from closed-form population moments
(construct :class:`MomentSummary` / :class:`CovInfo` directly) or from
plug-in estimates (:func:`estimate_moments`, :func:`estimate_cov_info`).
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_nonnegative, check_positive, check_positive_int
from .data import Dataset
from .exceptions import ContractError, DegenerateSampleError, DomainError, SingularityError
from .spectral import hs_norm, inv_sqrt, kappa, sym_eigen, sym_matrix

CONSTANTS_NOTE = ("All right-hand sides are stated up to an absolute constant C, "
                  "which is omitted; compare shapes, not absolute values.")

REPORT_KEYS = ("deltaA", "deltaB", "delta0", "delta0p", "delta1", "delta2",
               "rhsConvex", "rhsBall", "rhsBall2", "rhsCor3", "rhsMdep",
               "deltaStar", "deltaCirc", "constantsNote")


@dataclass(frozen=True, eq=False)
class MomentSummary:
    """Moment aggregates of the summands ``xi_i``.

    ``coord_fourth[j] = sqrt(n^-2 sum_i E X_ij^4)`` is on the ``X`` scale
    (``X_i = sqrt(n) xi_i``). ``whitened`` marks moments of
    ``Sigma^(-1/2) xi_i``.
    """

    n: int
    d: int
    sum2: float
    sum3: float
    sum4: float
    coord_fourth: np.ndarray
    sixth_bound: float | None = None
    scale: str = "raw-xi"
    whitened: bool = False

    def __post_init__(self):
        for name in ("sum2", "sum3", "sum4"):
            check_nonnegative(getattr(self, name), name)
        cf = np.asarray(self.coord_fourth, dtype=np.float64).reshape(-1)
        if cf.size != self.d or np.any(cf < 0):
            raise ContractError(f"coord_fourth must be a nonnegative vector of length d={self.d}")
        object.__setattr__(self, "coord_fourth", cf)


@dataclass(frozen=True, eq=False)
class CovInfo:
    """Covariance mismatch between the target ``sigma`` and ``Var(W)``."""

    sigma: np.ndarray
    sigma_w: np.ndarray
    hs_gap: float
    diag_gap: float
    white_gap: float | None
    op_delta: float

    @classmethod
    def from_matrices(cls, sigma, sigma_w, op_delta=0.0):
        sigma = sym_matrix(sigma)
        sigma_w = sym_matrix(sigma_w)
        if sigma.shape != sigma_w.shape:
            raise ContractError("sigma and sigma_w must have the same shape")
        diff = sigma - sigma_w
        try:
            root = inv_sqrt(sigma)
            white = hs_norm(np.eye(sigma.shape[0]) - root @ sigma_w @ root)
        except SingularityError:
            white = None
        return cls(sigma, sigma_w, hs_norm(diff), float(np.sum(np.abs(np.diag(diff)))),
                   white, check_nonnegative(op_delta, "op_delta"))


@dataclass
class BoundReport:
    deltaA: float | None = None
    deltaB: float | None = None
    delta0: float | None = None
    delta0p: float | None = None
    delta1: float | None = None
    delta2: float | None = None
    rhsConvex: float | None = None
    rhsBall: float | None = None
    rhsBall2: float | None = None
    rhsCor3: float | None = None
    rhsMdep: float | None = None
    deltaStar: float | None = None
    deltaCirc: float | None = None
    constantsNote: str = field(default=CONSTANTS_NOTE)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


def psi(x):
    """``x * max(|ln x|, 1)`` for ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise DomainError(f"psi is defined for x > 0, got {x}")
    return x * max(abs(math.log(x)), 1.0)


def _psi0(x):
    # continuous extension psi(0+) = 0, used only when assembling reports
    return 0.0 if x == 0 else psi(x)


def delta_convex(m, c):
    if not m.whitened:
        raise ContractError("delta_convex needs moments of the whitened summands Sigma^(-1/2) xi_i")
    if c.white_gap is None:
        raise SingularityError("delta_convex needs an invertible sigma")
    return c.white_gap + math.sqrt(m.sum4)


def delta_ball(m, c, s):
    """``||Sigma^-1||_op (||Sigma - Var W||_HS + sqrt(sum4))``."""
    lam_min = s.min_eigenvalue
    if lam_min <= 0:
        raise SingularityError(f"delta_ball needs an invertible sigma (smallest eigenvalue {lam_min:.3e})")
    return (c.hs_gap + math.sqrt(m.sum4)) / lam_min


def delta_functionals_ball2(m, c, s_w, s):
    """Return ``(delta0, delta0', delta1, delta2)`` for the centered-ball bound."""
    if s_w.dim != m.d or s.dim != m.d:
        raise ContractError("moment and covariance dimensions disagree")
    delta0 = math.sqrt((s_w.trace + s.trace) * (s_w.op_norm + s.op_norm)) * c.hs_gap
    delta0p = c.diag_gap
    delta1 = s_w.hs_norm * m.sum4 + s_w.op_norm ** 1.5 * m.sum3
    delta2 = math.sqrt(s_w.op_norm) * m.sum3 + m.sum4
    return delta0, delta0p, delta1, delta2


def rhs_ball2(kappa_val, deltas):
    kappa_val = check_positive(kappa_val, "kappa")
    d0, d0p, d1, d2 = (check_nonnegative(v, "delta") for v in deltas)
    return (kappa_val ** 0.75 * d1 ** 0.25 + kappa_val ** (2 / 3) * d2 ** (1 / 3)
            + kappa_val ** (2 / 3) * d0 ** (1 / 3) + math.sqrt(kappa_val) * math.sqrt(d0p))


def rhs_convex(d, delta_a):
    return check_positive_int(d, "d") ** 0.25 * psi(delta_a)


def rhs_ball(delta_b):
    return psi(delta_b)


def rhs_cor3(n, d):
    n = check_positive_int(n, "n")
    d = check_positive_int(d, "d")
    return n ** -0.125 + (d / n) ** (1 / 6)


def delta_star(m, c, s, deltas):
    """Bootstrap error shape with ``c.op_delta`` as the covariance deviation.

    ``m`` holds the moments of ``xi_i = X_i / sqrt(n)``, so
    ``n^-2 sum E|X_i|^4 = sum4`` and ``n^-3/2 sum E|X_i|^3 = sum3``.
    ``deltas`` is ``(delta1, delta2)`` of ``W``.
    """
    kap = kappa(s)
    d1, d2 = deltas
    op_delta = c.op_delta
    terms = (
        kap ** 0.75 * d1 ** 0.25,
        kap ** (2 / 3) * d2 ** (1 / 3),
        math.sqrt(kap) * math.sqrt(float(np.sum(m.coord_fourth))),
        kap ** (2 / 3) * s.trace ** (1 / 6) * (op_delta + s.op_norm) ** (1 / 6) * m.sum4 ** (1 / 6),
        kap ** 0.75 * (op_delta ** 1.5 * m.sum3) ** 0.25,
        kap ** (2 / 3) * (math.sqrt(op_delta) * m.sum3) ** (1 / 3),
    )
    return float(sum(terms))


def delta_circ(m, c, s, deltas):
    """Same assembly as :func:`delta_star`; ``c.op_delta`` must come from the
    uncentered second-moment matrix (see :func:`estimate_cov_info` with
    ``kind='wild'``)."""
    return delta_star(m, c, s, deltas)


def subgauss_op_norm_bound(L, s, n):
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    n = check_positive_int(n, "n")
    return L ** 2 * math.sqrt(s.op_norm * s.trace / n) + L ** 4 * s.trace / n


def rhs_mdep(n, m, delta_sixth, sum2, d):
    """Shape of the centered-ball bound for ``m``-dependent summands."""
    n = check_positive_int(n, "n")
    m = check_positive_int(m, "m", minimum=0)
    d = check_positive_int(d, "d")
    if m >= n:
        raise DomainError(f"need n > m, got n={n}, m={m}")
    delta = check_positive(delta_sixth, "delta")
    sum2 = check_nonnegative(sum2, "sum2")
    mt = max(m, 1)
    q4 = n * mt ** 3 * delta ** 4
    first = ((mt * sum2 + q4) * (q4 * (q4 + 1.0)) / d ** 3) ** 0.125
    second = ((n * mt ** 2 * delta ** 3 + q4) / d) ** (1 / 3)
    return first + second


def _as_dataset(data):
    return data if isinstance(data, Dataset) else Dataset(data)


def estimate_moments(data, whitened=False):
    """Plug-in moment sums: each observed ``xi_i`` stands in for its own law."""
    data = _as_dataset(data)
    xi = data.summands()
    norms2 = np.einsum("ij,ij->i", xi, xi)
    norms = np.sqrt(norms2)
    n = data.n
    x = data.raw()
    coord = np.sqrt(np.sum(x ** 4, axis=0) / n ** 2)
    sixth = float(np.mean(norms2 ** 3)) ** (1 / 6)
    sum2 = float(np.sum(norms2))
    sum4 = float(np.sum(norms2 * norms2))
    # clamp to the Cauchy-Schwarz value to absorb summation round-off
    sum3 = min(float(np.sum(norms2 * norms)), math.sqrt(sum2 * sum4))
    return MomentSummary(n=n, d=data.d, sum2=sum2, sum3=sum3, sum4=sum4, coord_fourth=coord,
                         sixth_bound=sixth if sixth > 0 else None, scale=data.scale,
                         whitened=whitened)


def sample_covariance(x, centered=True):
    """``n^-1 sum (X_i - Xbar)(X_i - Xbar)^T``, or the uncentered version."""
    x = np.asarray(x, dtype=np.float64)
    if centered:
        if x.shape[0] < 2:
            raise DegenerateSampleError("centered sample covariance needs n >= 2")
        x = x - x.mean(axis=0)
    return sym_matrix(x.T @ x / x.shape[0])


def estimate_cov_info(data, sigma, kind="efron"):
    """Compare ``sigma`` with the plug-in ``Var(W)``.

    ``kind='efron'`` uses the centered sample covariance of the ``X_i``,
    ``kind='wild'`` the uncentered one; ``op_delta`` is its operator-norm
    distance to ``sigma``.
    """
    data = _as_dataset(data)
    if kind not in ("efron", "wild"):
        raise ContractError(f"kind must be 'efron' or 'wild', got {kind!r}")
    est = sample_covariance(data.raw(), centered=(kind == "efron"))
    sigma = sym_matrix(sigma)
    op = sym_eigen(est - sigma).op_norm
    return CovInfo.from_matrices(sigma, est, op_delta=op)


def bound_report(data, sigma, *, ma_order=0):
    """Evaluate every functional from plug-in estimates on ``data``.

    Fields that are undefined for the inputs (e.g. ``deltaA`` for singular
    ``sigma`` or ``deltaStar`` when ``Lambda_2(sigma) = 0``) are left as
    ``None``.
    """
    data = _as_dataset(data)
    sigma = sym_matrix(sigma)
    moments = estimate_moments(data)
    cov = estimate_cov_info(data, sigma, "efron")
    cov_wild = estimate_cov_info(data, sigma, "wild")
    s = sym_eigen(sigma)
    s_w = sym_eigen(cov.sigma_w)
    report = BoundReport()

    d0, d0p, d1, d2 = delta_functionals_ball2(moments, cov, s_w, s)
    report.delta0, report.delta0p, report.delta1, report.delta2 = d0, d0p, d1, d2
    report.rhsCor3 = rhs_cor3(data.n, data.d)

    if s.min_eigenvalue > 0:
        root = inv_sqrt(sigma, summary=s)
        whitened = estimate_moments(data.with_rows(data.rows @ root), whitened=True)
        report.deltaA = delta_convex(whitened, cov)
        report.rhsConvex = data.d ** 0.25 * _psi0(report.deltaA)
        report.deltaB = delta_ball(moments, cov, s)
        report.rhsBall = _psi0(report.deltaB)
    if s.kappa is not None:
        report.rhsBall2 = rhs_ball2(s.kappa, (d0, d0p, d1, d2))
        report.deltaStar = delta_star(moments, cov, s, (d1, d2))
        report.deltaCirc = delta_circ(moments, cov_wild, s, (d1, d2))
    if moments.sixth_bound is not None and data.n > ma_order:
        report.rhsMdep = rhs_mdep(data.n, ma_order, moments.sixth_bound, moments.sum2, data.d)
    return report
