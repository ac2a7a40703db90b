"""Gaussian approximation error functionals, Gaussian ball probabilities and
Monte Carlo checks for sums of high-dimensional random vectors."""

__version__ = "0.1.0"

from .bootstrap import bootstrap, bootstrap_quantile, coverage_experiment, efron_stats, op_norm_delta, wild_stats
from .bounds import BoundReport, CovInfo, MomentSummary, bound_report, estimate_cov_info, estimate_moments, psi
from .data import Dataset, load_dataset, save_dataset
from .dgp import DgpSpec, nagaev_params, sample
from .estimators import BootstrapNormQuantile, GaussianApproximationBounds, Whitener
from .exceptions import (
    ConfigError,
    ContractError,
    ConvergenceError,
    DataError,
    DegenerateSampleError,
    DomainError,
    HDGaussError,
    RankDeficiencyError,
    SingularityError,
)
from .gaussball import anti_concentration_ratio, ball_prob, imhof_cdf, to_weighted_chi2
from .mc import DistanceEstimate, ball_distance, halfspace_distance, ks_ball_distance, run_replicated
from .special import chi2_cdf
from .spectral import SpectralSummary, inv_sqrt, kappa, lambda_k, sym_eigen, whiten

__all__ = [
    "BootstrapNormQuantile", "BoundReport", "ConfigError", "ContractError", "ConvergenceError",
    "CovInfo", "DataError", "Dataset", "DegenerateSampleError", "DgpSpec", "DistanceEstimate",
    "DomainError", "GaussianApproximationBounds", "HDGaussError", "MomentSummary",
    "RankDeficiencyError", "SingularityError", "SpectralSummary", "Whitener",
    "anti_concentration_ratio", "ball_distance", "ball_prob", "bootstrap", "bootstrap_quantile",
    "bound_report", "chi2_cdf", "coverage_experiment", "efron_stats", "estimate_cov_info",
    "estimate_moments", "halfspace_distance", "imhof_cdf", "inv_sqrt", "kappa", "ks_ball_distance",
    "lambda_k", "load_dataset", "nagaev_params", "op_norm_delta", "psi", "run_replicated", "sample",
    "save_dataset", "sym_eigen", "to_weighted_chi2", "whiten", "wild_stats",
]
