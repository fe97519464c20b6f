"""
Similarity Module - Estimasi similarity matrix dari Dataset
"""

from app.similarity.base import (
    ESTIMATORS,
    SimilarityMatrix,
    load_similarity,
    read_upper_triangles,
    write_upper_triangles,
)
from app.similarity.correlation import (
    standardize_rows,
    pearson_matrix,
    spearman_matrix,
    ledoit_wolf_matrix,
    ground_truth_similarity,
)
from app.similarity.mutual_info import (
    equal_frequency_bins,
    binned_mi,
    binned_mi_matrix,
    ksg_mi,
    ksg_mi_matrix,
)
from app.similarity.estimate import ESTIMATOR_FUNCTIONS, estimate_similarity

__all__ = [
    "ESTIMATORS",
    "SimilarityMatrix",
    "load_similarity",
    "read_upper_triangles",
    "write_upper_triangles",
    "standardize_rows",
    "pearson_matrix",
    "spearman_matrix",
    "ledoit_wolf_matrix",
    "ground_truth_similarity",
    "equal_frequency_bins",
    "binned_mi",
    "binned_mi_matrix",
    "ksg_mi",
    "ksg_mi_matrix",
    "ESTIMATOR_FUNCTIONS",
    "estimate_similarity",
]
