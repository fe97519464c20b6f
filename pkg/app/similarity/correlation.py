"""
Correlation Estimators - Pearson, Spearman, Ledoit-Wolf, ground truth
"""

import logging

import numpy as np
from scipy.stats import rankdata
from sklearn.covariance import ledoit_wolf
from sklearn.metrics.pairwise import cosine_similarity

from app.exceptions import InvalidArgumentError
from app.field.covariance import MaternParams, ground_truth_covariance, lognormal_correlation
from app.field.dataset import Dataset
from app.grid.sphere_grid import SphereGrid
from app.similarity.base import SimilarityMatrix

logger = logging.getLogger(__name__)


def standardize_rows(values: np.ndarray):
    """
    Centre dan scale setiap baris (ddof=0)

    Returns:
        Tuple (standardized, zero-variance mask); baris konstan menjadi 0
    """
    centered = values - values.mean(axis=1, keepdims=True)
    std = centered.std(axis=1)
    zero = std <= 0
    out = centered / np.where(zero, 1.0, std)[:, None]
    out[zero] = 0.0
    return out, zero


def _correlation_from_rows(values: np.ndarray, flagged: np.ndarray):
    standardized, zero = standardize_rows(values)
    flagged = flagged | zero
    # cosine similarity pada baris yang sudah di-centre = Pearson (1/n) sum x_it x_jt
    corr = cosine_similarity(standardized)
    corr[flagged, :] = 0.0
    corr[:, flagged] = 0.0
    np.fill_diagonal(corr, 1.0)
    return np.clip(corr, -1.0, 1.0), flagged


def pearson_matrix(data: Dataset) -> SimilarityMatrix:
    """
    Empirical Pearson correlation matrix

    Args:
        data: Dataset (re-standardized di sini)

    Returns:
        SimilarityMatrix "pearson_empirical"; node ber-variansi nol di-flag
    """
    if data.n < 2:
        raise InvalidArgumentError(f"pearson_matrix needs n >= 2, got {data.n}")
    corr, flagged = _correlation_from_rows(data.values, data.flagged)
    if flagged.any():
        logger.warning(f"{int(flagged.sum())} zero-variance or flagged nodes in pearson_matrix")
    return SimilarityMatrix(entries=corr, estimator="pearson_empirical", n=data.n, flagged=flagged)


def spearman_matrix(data: Dataset) -> SimilarityMatrix:
    """Pearson pada rank per baris (average rank untuk ties)"""
    if data.n < 3:
        raise InvalidArgumentError(f"spearman_matrix needs n >= 3, got {data.n}")
    ranks = rankdata(data.values, method="average", axis=1)
    corr, flagged = _correlation_from_rows(ranks, data.flagged)
    return SimilarityMatrix(entries=corr, estimator="spearman", n=data.n, flagged=flagged)


def ledoit_wolf_matrix(data: Dataset) -> SimilarityMatrix:
    """
    Linear Ledoit-Wolf shrinkage, lalu normalisasi ke correlation

    Raises:
        InvalidArgumentError: data degenerate (rank 0)
    """
    if data.n < 2:
        raise InvalidArgumentError(f"ledoit_wolf_matrix needs n >= 2, got {data.n}")
    standardized, zero = standardize_rows(data.values)
    flagged = data.flagged | zero
    if flagged.all():
        raise InvalidArgumentError("ledoit_wolf_matrix: data has rank 0")

    shrunk, shrinkage = ledoit_wolf(standardized.T, assume_centered=True)
    std = np.sqrt(np.diag(shrunk))
    std = np.where(std > 0, std, 1.0)
    corr = shrunk / np.outer(std, std)
    corr[flagged, :] = 0.0
    corr[:, flagged] = 0.0
    np.fill_diagonal(corr, 1.0)

    return SimilarityMatrix(
        entries=np.clip(corr, -1.0, 1.0),
        estimator="ledoit_wolf",
        n=data.n,
        flagged=flagged,
        metadata={"shrinkage": float(shrinkage)},
    )


def ground_truth_similarity(
    grid: SphereGrid,
    params: MaternParams,
    marginal: str = "gaussian",
    sigma2: float = None,
) -> SimilarityMatrix:
    """
    Analytic correlation matrix dari Matern covariance

    Untuk marginal log-normal, korelasi Pearson dari exp(sigma X) dipakai.
    """
    corr = ground_truth_covariance(grid, params).correlation()
    if marginal == "lognormal":
        if sigma2 is None:
            raise InvalidArgumentError("lognormal ground truth needs sigma2")
        corr = lognormal_correlation(corr, sigma2)
    elif marginal != "gaussian":
        raise InvalidArgumentError(f"Unknown marginal '{marginal}'")
    return SimilarityMatrix(
        entries=corr,
        estimator="ground_truth",
        metadata={"params": params.model_dump(), "marginal": marginal},
    )
