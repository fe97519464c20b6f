"""
Time Resampling - Moving-block bootstrap dan subsampling window
"""

from typing import List, Optional

import numpy as np

from app.exceptions import InvalidArgumentError
from app.field.dataset import Dataset


def default_block_length(n: int) -> int:
    """round(n^(1/3)), minimal 1"""
    return max(1, int(round(n ** (1.0 / 3.0))))


def block_bootstrap_indices(n: int, block_len: Optional[int] = None, seed: int = 0) -> np.ndarray:
    """
    Moving-block bootstrap indices

    Args:
        n: Panjang series
        block_len: Panjang block (default round(n^(1/3)))
        seed: RNG seed

    Returns:
        Array panjang n; block index berurutan dengan start uniform di [0, n - block_len]
    """
    block_len = block_len or default_block_length(n)
    if not 1 <= block_len <= n:
        raise InvalidArgumentError(f"block_len must lie in [1, {n}], got {block_len}")
    rng = np.random.default_rng(seed)
    n_blocks = -(-n // block_len)
    starts = rng.integers(0, n - block_len + 1, size=n_blocks)
    return (starts[:, None] + np.arange(block_len)[None, :]).ravel()[:n]


def subsample_windows(n: int, window: int, stride: Optional[int] = None, m: Optional[int] = None) -> List[np.ndarray]:
    """
    Contiguous window [s, s + window) dengan langkah stride

    Kalau m diberikan dan window yang tersedia lebih banyak, diambil m start
    yang tersebar merata.
    """
    if not 1 <= window <= n:
        raise InvalidArgumentError(f"window must lie in [1, {n}], got {window}")
    stride = stride or max(1, window // 2)
    starts = np.arange(0, n - window + 1, stride)
    if m is not None and m < starts.size:
        starts = starts[np.round(np.linspace(0, starts.size - 1, m)).astype(int)]
    return [np.arange(s, s + window) for s in starts]


def resample_dataset(data: Dataset, indices) -> Dataset:
    """Pilih kolom waktu secara bersamaan untuk semua node"""
    indices = np.asarray(indices, dtype=int)
    if indices.ndim != 1 or indices.size == 0:
        raise InvalidArgumentError("indices must be a non-empty 1-D sequence")
    if indices.min() < 0 or indices.max() >= data.n:
        raise InvalidArgumentError(f"indices must lie in [0, {data.n})")
    return Dataset(
        values=data.values[:, indices],
        grid=data.grid,
        flagged=data.flagged.copy(),
        metadata={**data.metadata, "resampled": True},
    )
