"""
Surrogates Module - Surrogate time series, resampling, edge baseline, rewiring
"""

from app.surrogates.timeseries import (
    IaaftResult,
    shuffle_surrogate,
    shuffle_surrogates,
    spectrum_deviation,
    iaaft_surrogates,
    iaaft_surrogate,
)
from app.surrogates.resampling import (
    default_block_length,
    block_bootstrap_indices,
    subsample_windows,
    resample_dataset,
)
from app.surrogates.baseline import METHODS, EdgeBaseline, edge_baseline, load_baseline
from app.surrogates.rewiring import degree_preserving_rewire, geomodel2_rewire

__all__ = [
    "IaaftResult",
    "shuffle_surrogate",
    "shuffle_surrogates",
    "spectrum_deviation",
    "iaaft_surrogates",
    "iaaft_surrogate",
    "default_block_length",
    "block_bootstrap_indices",
    "subsample_windows",
    "resample_dataset",
    "METHODS",
    "EdgeBaseline",
    "edge_baseline",
    "load_baseline",
    "degree_preserving_rewire",
    "geomodel2_rewire",
]
