"""Symmetric eigendecomposition and the spectral functionals built on it.

The decomposition is a cyclic Jacobi iteration using a round-robin
(tournament) ordering, so each of the ``d - 1`` rounds in a sweep applies
``d / 2`` disjoint plane rotations at once as vectorised row/column updates.
Above ``JACOBI_MAX_DIM`` the ``auto`` method hands over to LAPACK.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_square
from .data import Dataset
from .exceptions import ContractError, ConvergenceError, RankDeficiencyError, SingularityError

MAX_SWEEPS = 100
JACOBI_MAX_DIM = 256
ZERO_CLAMP = 1e-12


def sym_matrix(entries):
    """Return a read-only, exactly symmetric float64 copy of ``entries``."""
    m = check_square(entries)
    m = 0.5 * (m + m.T)
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    eigenvalues: np.ndarray
    basis: np.ndarray
    lambda1: float
    lambda2: float
    kappa: float | None
    trace: float
    op_norm: float
    hs_norm: float

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    @property
    def min_eigenvalue(self):
        return float(self.eigenvalues[-1])


def _round_robin(d):
    """Pairings for one sweep; ``d`` must be even."""
    players = list(range(d))
    rounds = []
    for _ in range(d - 1):
        half = d // 2
        p = np.array(players[:half])
        q = np.array(players[::-1][:half])
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _jacobi(m, tol):
    d = m.shape[0]
    size = d + (d % 2)
    a = np.zeros((size, size))
    a[:d, :d] = m
    v = np.eye(size)
    scale = math.sqrt(float(np.sum(m * m)))
    target = 1e-3 * tol * (1.0 + scale)
    rounds = _round_robin(size) if size > 1 else []
    off_mask = ~np.eye(size, dtype=bool)

    previous = math.inf
    for _ in range(MAX_SWEEPS):
        off = math.sqrt(float(np.sum(a[off_mask] ** 2)))
        if off <= target or off == 0.0:
            break
        if off >= previous and off <= tol * (1.0 + scale):
            # Stagnated at round-off level while already inside the budget.
            break
        previous = off
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not np.any(active):
                continue
            app = a[p, p]
            aqq = a[q, q]
            safe = np.where(active, apq, 1.0)
            theta = (aqq - app) / (2.0 * safe)
            sign = np.where(theta >= 0.0, 1.0, -1.0)
            t = sign / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            c = np.where(active, c, 1.0)
            s = np.where(active, s, 0.0)

            cols_p = a[:, p].copy()
            cols_q = a[:, q]
            a[:, p] = c * cols_p - s * cols_q
            a[:, q] = s * cols_p + c * cols_q
            rows_p = a[p, :].copy()
            rows_q = a[q, :]
            a[p, :] = c[:, None] * rows_p - s[:, None] * rows_q
            a[q, :] = s[:, None] * rows_p + c[:, None] * rows_q
            a[p, q] = 0.0
            a[q, p] = 0.0

            vp = v[:, p].copy()
            vq = v[:, q]
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    else:
        off = math.sqrt(float(np.sum(a[off_mask] ** 2)))
        if off > tol * (1.0 + scale):
            raise ConvergenceError(
                f"Jacobi eigensolver did not converge for a {d}x{d} matrix "
                f"after {MAX_SWEEPS} sweeps (off-diagonal norm {off:.3e})",
                achieved_error=off,
            )
    return np.diag(a)[:d].copy(), v[:d, :d].copy()


def sym_eigen(m, tol=1e-12, method="auto"):
    """Eigendecompose a symmetric matrix.

    Returns a :class:`SpectralSummary` with eigenvalues sorted in descending
    order (ties keep their original diagonal order) and an orthonormal basis
    whose columns are the matching eigenvectors. Eigenvalues within
    ``1e-12 * Lambda_1`` of zero are set to exactly zero.
    """
    if tol < 1e-14:
        raise ContractError(f"tol must be >= 1e-14, got {tol}")
    m = sym_matrix(m)
    d = m.shape[0]
    if method == "auto":
        method = "jacobi" if d <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        w, v = _jacobi(np.array(m), tol)
    elif method == "lapack":
        w, v = np.linalg.eigh(m)
    else:
        raise ContractError(f"unknown eigen method {method!r}")

    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    lam1 = math.sqrt(float(np.sum(w * w)))
    w = np.where(np.abs(w) <= ZERO_CLAMP * lam1, 0.0, w)
    w.setflags(write=False)
    v.setflags(write=False)
    return _summarise(w, v)


def _summarise(w, v):
    lam1 = math.sqrt(float(np.sum(w * w)))
    lam2 = math.sqrt(float(np.sum(w[1:] * w[1:])))
    kap = (lam1 * lam2) ** -0.5 if lam2 > 0 else None
    return SpectralSummary(
        eigenvalues=w,
        basis=v,
        lambda1=lam1,
        lambda2=lam2,
        kappa=kap,
        trace=float(np.sum(w)),
        op_norm=float(np.max(np.abs(w))),
        hs_norm=lam1,
    )


def lambda_k(s, k):
    """Root-sum-of-squares of the eigenvalues from the ``k``-th largest on."""
    if k not in (1, 2):
        raise ContractError(f"k must be 1 or 2, got {k}")
    if k > s.dim:
        raise RankDeficiencyError(f"Lambda_{k} is undefined for a {s.dim}x{s.dim} matrix")
    return s.lambda1 if k == 1 else s.lambda2


def kappa(s):
    """``(Lambda_1 Lambda_2)^(-1/2)``; raises when ``Lambda_2 == 0``."""
    if s.kappa is None:
        raise RankDeficiencyError(
            "kappa requires Lambda_2 > 0 (the matrix has at most one nonzero eigenvalue)")
    return s.kappa


def _spectral(m, summary):
    return summary if summary is not None else sym_eigen(m)


def matrix_function(m, fn, summary=None):
    s = _spectral(m, summary)
    v = s.basis
    out = (v * fn(s.eigenvalues)) @ v.T
    return sym_matrix(out)


def inv_sqrt(m, ridge=0.0, summary=None):
    """``(m + ridge I)^(-1/2)`` for a symmetric matrix ``m``."""
    if ridge < 0:
        raise ContractError(f"ridge must be nonnegative, got {ridge}")
    s = _spectral(m, summary)
    shifted = s.eigenvalues + ridge
    if np.any(shifted <= 0.0):
        raise SingularityError(
            f"matrix is singular or indefinite (smallest eigenvalue {s.min_eigenvalue:.3e}); "
            "supply ridge > 0")
    return matrix_function(m, lambda w: 1.0 / np.sqrt(w + ridge), summary=s)


def sqrt_psd(m, summary=None):
    """Symmetric square root; small negative eigenvalues are treated as zero."""
    return matrix_function(m, lambda w: np.sqrt(np.clip(w, 0.0, None)), summary=summary)


def op_norm(m):
    return sym_eigen(m).op_norm


def hs_norm(m):
    m = np.asarray(m, dtype=np.float64)
    return math.sqrt(float(np.sum(m * m)))


def whiten(data, target):
    """Map each summand ``xi_i`` to ``target^(-1/2) xi_i``.

    ``target`` should be the exact ``Var(W)`` of the generating process, so
    the whitened sum has identity covariance.
    """
    if not isinstance(data, Dataset):
        data = Dataset(data)
    t = sym_matrix(target)
    if t.shape[0] != data.d:
        raise ContractError(f"target is {t.shape[0]}x{t.shape[0]}, data has d={data.d}")
    root = inv_sqrt(t)
    return data.with_rows(data.rows @ root)


def read_matrix_csv(path_or_text):
    """Parse the ``dim=d`` headed, row-major CSV matrix format."""
    text = path_or_text
    if "\n" not in str(path_or_text):
        with open(path_or_text) as fh:
            text = fh.read()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("dim="):
        raise ContractError("matrix CSV must start with a 'dim=d' header")
    d = int(lines[0][4:])
    body = lines[1:]
    if len(body) != d:
        raise ContractError(f"matrix CSV declares dim={d} but has {len(body)} rows")
    rows = [[float(x) for x in ln.split(",")] for ln in body]
    if any(len(r) != d for r in rows):
        raise ContractError(f"matrix CSV rows must have {d} entries")
    return sym_matrix(np.array(rows))


def format_matrix_csv(m):
    m = np.asarray(m, dtype=np.float64)
    lines = [f"dim={m.shape[0]}"]
    lines += [",".join(format(float(x), ".17g") for x in row) for row in m]
    return "\n".join(lines) + "\n"


def write_matrix_csv(m, path):
    with open(path, "w") as fh:
        fh.write(format_matrix_csv(m))
