"""scikit-learn style wrappers around the functional API."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_data
from .bootstrap import bootstrap
from .bounds import bound_report, sample_covariance
from .data import Dataset
from .spectral import inv_sqrt, sym_matrix


class Whitener(TransformerMixin, BaseEstimator):
    """Map rows to ``target^(-1/2) x``.

    With ``target=None`` the target is the centered sample covariance seen in
    ``fit``. ``ridge`` is passed on to :func:`hdgauss.spectral.inv_sqrt`.
    """

    def __init__(self, target=None, ridge=0.0):
        self.target = target
        self.ridge = ridge

    def fit(self, X, y=None):
        X = check_data(X, min_rows=1 if self.target is not None else 2)
        target = sample_covariance(X) if self.target is None else sym_matrix(self.target)
        self.n_features_in_ = X.shape[1]
        self.components_ = inv_sqrt(target, ridge=self.ridge)
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_data(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return X @ self.components_


class GaussianApproximationBounds(BaseEstimator):
    """Plug-in error functionals for the normalized sum of the rows of ``X``.

    ``X`` holds the raw ``X_i``; the summands are ``X_i / sqrt(n)``.
    ``sigma=None`` compares against the identity.
    """

    def __init__(self, sigma=None, ma_order=0):
        self.sigma = sigma
        self.ma_order = ma_order

    def fit(self, X, y=None):
        X = check_data(X, min_rows=2)
        sigma = np.eye(X.shape[1]) if self.sigma is None else self.sigma
        self.n_features_in_ = X.shape[1]
        self.report_ = bound_report(Dataset(X, "x-over-sqrt-n"), sigma, ma_order=self.ma_order)
        return self

    def to_dict(self):
        check_is_fitted(self, "report_")
        return self.report_.to_dict()


class BootstrapNormQuantile(BaseEstimator):
    """Bootstrap ``(1 - alpha)`` quantile of ``|W|``, ``W = n^-1/2 sum_i X_i``.

    After ``fit``, ``predict`` flags sums whose norm exceeds the quantile.
    """

    def __init__(self, kind="efron", n_boot=500, alpha=0.1, multiplier="gaussian", random_state=0):
        self.kind = kind
        self.n_boot = n_boot
        self.alpha = alpha
        self.multiplier = multiplier
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_data(X, min_rows=2 if self.kind == "efron" else 1)
        run = bootstrap(X, self.n_boot, self.alpha, self.kind, self.multiplier, self.random_state)
        self.n_features_in_ = X.shape[1]
        self.stat_values_ = run.stat_values
        self.quantile_ = run.quantile
        return self

    def predict(self, W):
        """``|w| > quantile_`` for each row of ``W``."""
        check_is_fitted(self, "quantile_")
        W = check_data(W)
        return np.sqrt(np.einsum("ij,ij->i", W, W)) > self.quantile_
