"""
Estimator dispatch berdasarkan tag
"""

from typing import Callable, Dict

from app.exceptions import InvalidArgumentError
from app.field.dataset import Dataset
from app.similarity.base import SimilarityMatrix
from app.similarity.correlation import ledoit_wolf_matrix, pearson_matrix, spearman_matrix
from app.similarity.mutual_info import binned_mi_matrix, ksg_mi_matrix

ESTIMATOR_FUNCTIONS: Dict[str, Callable[..., SimilarityMatrix]] = {
    "pearson_empirical": pearson_matrix,
    "spearman": spearman_matrix,
    "ledoit_wolf": ledoit_wolf_matrix,
    "mi_binned": binned_mi_matrix,
    "mi_ksg": ksg_mi_matrix,
}


def estimate_similarity(data: Dataset, estimator: str, **options) -> SimilarityMatrix:
    """
    Estimasi similarity matrix dengan estimator yang dipilih

    Args:
        data: Dataset
        estimator: Tag estimator (lihat ESTIMATOR_FUNCTIONS)
        **options: Diteruskan ke estimator (bins, k, seed)
    """
    try:
        func = ESTIMATOR_FUNCTIONS[estimator]
    except KeyError:
        raise InvalidArgumentError(
            f"Unknown estimator '{estimator}', expected one of {sorted(ESTIMATOR_FUNCTIONS)}"
        ) from None
    return func(data, **options)
