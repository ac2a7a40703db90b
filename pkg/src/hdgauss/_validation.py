"""Input validation helpers used by the functional API and the estimators."""

import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import ContractError, DataError, DomainError


def check_data(X, *, min_rows=1, name="X"):
    """Return ``X`` as a finite 2-D float64 array with at least ``min_rows`` rows."""
    try:
        X = check_array(X, dtype=np.float64, ensure_2d=True,
                        ensure_min_samples=min_rows, ensure_all_finite=True)
    except ValueError as exc:
        raise DataError(f"{name}: {exc}") from exc
    return X


def check_square(m, name="matrix"):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ContractError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DataError(f"{name} contains non-finite entries")
    return m


def check_vector(v, dim=None, name="vector"):
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise ContractError(f"{name} has length {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise DataError(f"{name} contains non-finite entries")
    return v


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ContractError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_nonnegative(value, name):
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be a finite nonnegative number, got {value}")
    return value


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a finite positive number, got {value}")
    return value


def check_alpha(alpha):
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha
