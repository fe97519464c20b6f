"""
Field Module - Ground-truth random fields dan Dataset
"""

from app.field.covariance import (
    MaternParams,
    CovarianceMatrix,
    matern_correlation,
    ground_truth_covariance,
    lognormal_correlation,
    innovation_covariance,
    stationary_covariance,
    sampling_factor,
)
from app.field.autocorr import (
    asymptotic_variance,
    effective_length,
    analytic_quantile,
    simulate_ar1,
    anisotropic_autocorr,
    lag1_autocorrelation,
)
from app.field.dataset import Dataset
from app.field.simulation import FieldSpec, NoiseSpec, simulate

__all__ = [
    "MaternParams",
    "CovarianceMatrix",
    "matern_correlation",
    "ground_truth_covariance",
    "lognormal_correlation",
    "innovation_covariance",
    "stationary_covariance",
    "sampling_factor",
    "asymptotic_variance",
    "effective_length",
    "analytic_quantile",
    "simulate_ar1",
    "anisotropic_autocorr",
    "lag1_autocorrelation",
    "Dataset",
    "FieldSpec",
    "NoiseSpec",
    "simulate",
]
