"""
Mutual Information - Binned (equal-frequency) dan KSG nearest-neighbour estimator
"""

from typing import Optional
import logging

import numpy as np
from scipy.special import digamma, xlogy
from sklearn.neighbors import KDTree

from app.config import SIMILARITY_CONFIG
from app.exceptions import InvalidArgumentError
from app.field.dataset import Dataset
from app.similarity.base import SimilarityMatrix

logger = logging.getLogger(__name__)

# batas elemen array sementara per batch
_BATCH_BUDGET = 20_000_000


def equal_frequency_bins(values: np.ndarray, bins: int) -> np.ndarray:
    """Bin index per elemen berdasarkan ordinal rank: floor(rank * bins / n)"""
    n = values.shape[-1]
    ranks = np.argsort(np.argsort(values, axis=-1, kind="stable"), axis=-1, kind="stable")
    return (ranks * bins) // n


def _entropy_from_counts(counts: np.ndarray, n: int, axis) -> np.ndarray:
    """Plug-in entropy (nats) dari count array"""
    return np.log(n) - xlogy(counts, counts).sum(axis=axis) / n


def binned_mi(x: np.ndarray, y: np.ndarray, bins: int) -> float:
    """Plug-in MI untuk satu pasangan"""
    bx = equal_frequency_bins(np.asarray(x, dtype=float), bins)
    by = equal_frequency_bins(np.asarray(y, dtype=float), bins)
    n = bx.size
    joint = np.bincount(bx * bins + by, minlength=bins * bins)
    hx = _entropy_from_counts(np.bincount(bx, minlength=bins), n, axis=0)
    hy = _entropy_from_counts(np.bincount(by, minlength=bins), n, axis=0)
    return float(hx + hy - _entropy_from_counts(joint, n, axis=0))


def binned_mi_matrix(data: Dataset, bins: Optional[int] = None) -> SimilarityMatrix:
    """
    Plug-in MI matrix dengan equal-frequency marginal bins

    Args:
        data: Dataset
        bins: Jumlah bin (default floor(n / 5))

    Returns:
        SimilarityMatrix "mi_binned" dalam nats
    """
    n, p = data.n, data.p
    if bins is None:
        bins = n // SIMILARITY_CONFIG["bins_per_sample"]
    if bins > n:
        raise InvalidArgumentError(f"bins ({bins}) exceeds sample length ({n})")
    if bins < 2:
        raise InvalidArgumentError(f"binned MI needs at least 2 bins, got {bins}")

    codes = equal_frequency_bins(data.values, bins)
    marginal = np.stack([np.bincount(row, minlength=bins) for row in codes])
    h = _entropy_from_counts(marginal, n, axis=1)

    cells = bins * bins
    chunk = max(1, min(SIMILARITY_CONFIG["mi_chunk"], _BATCH_BUDGET // max(1, p * max(cells, n))))
    mi = np.empty((p, p))
    for start in range(0, p, chunk):
        stop = min(start + chunk, p)
        joint_codes = codes[start:stop, None, :] * bins + codes[None, :, :]
        offsets = np.arange((stop - start) * p).reshape(stop - start, p, 1) * cells
        counts = np.bincount((joint_codes + offsets).ravel(), minlength=(stop - start) * p * cells)
        counts = counts.reshape(stop - start, p, cells)
        h_joint = _entropy_from_counts(counts, n, axis=2)
        mi[start:stop] = h[start:stop, None] + h[None, :] - h_joint

    mi[data.flagged, :] = 0.0
    mi[:, data.flagged] = 0.0
    return SimilarityMatrix(
        entries=mi,
        estimator="mi_binned",
        n=n,
        flagged=data.flagged.copy(),
        metadata={"bins": bins},
    )


def _node_jitter(values: np.ndarray, seed: int) -> np.ndarray:
    """Jitter deterministik 1e-10 * std per node dari (seed, node)"""
    out = np.empty_like(values)
    scale = SIMILARITY_CONFIG["ksg_jitter"]
    for node, row in enumerate(values):
        rng = np.random.default_rng([seed, node])
        out[node] = row + scale * row.std() * rng.standard_normal(row.size)
    return out


def _ksg_formula(k: int, n: int, n_x: np.ndarray, n_y: np.ndarray, axis=-1):
    return digamma(k) + np.log(n) - np.mean(np.log(n_x) + np.log(n_y), axis=axis)


def ksg_mi(x: np.ndarray, y: np.ndarray, k: int = None, pair=None) -> float:
    """
    Bias-corrected KSG MI (max-norm) untuk satu pasangan

    I = psi(k) + log n - < log n_x + log n_y >, dengan n_x jumlah titik lain
    dalam jarak <= rho_k pada marginal x.

    Raises:
        InvalidArgumentError: jika rho_k = 0 (duplikat)
    """
    k = k or SIMILARITY_CONFIG["ksg_k"]
    x = np.asarray(x, dtype=float).reshape(-1, 1)
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    n = x.shape[0]
    if not 0 < k < n:
        raise InvalidArgumentError(f"KSG needs 0 < k < n, got k={k}, n={n}")

    joint = np.hstack([x, y])
    dist, _ = KDTree(joint, metric="chebyshev").query(joint, k=k + 1)
    rho = dist[:, k]
    if np.any(rho <= 0):
        where = f" for node pair {pair}" if pair is not None else ""
        raise InvalidArgumentError(f"KSG found duplicate points{where}; k-th neighbour distance is 0")

    n_x = KDTree(x, metric="chebyshev").query_radius(x, r=rho, count_only=True) - 1
    n_y = KDTree(y, metric="chebyshev").query_radius(y, r=rho, count_only=True) - 1
    return float(_ksg_formula(k, n, n_x, n_y))


def _ksg_dense_row(values: np.ndarray, i: int, targets: np.ndarray, k: int) -> np.ndarray:
    """KSG untuk pasangan (i, j), j di targets, pakai matriks jarak penuh"""
    n = values.shape[1]
    dx = np.abs(values[i][:, None] - values[i][None, :])
    dy = np.abs(values[targets][:, :, None] - values[targets][:, None, :])
    joint = np.maximum(dx[None], dy)
    diag = np.arange(n)
    joint[:, diag, diag] = np.inf

    rho = np.partition(joint, k - 1, axis=-1)[..., k - 1]
    if np.any(rho <= 0):
        bad = targets[np.flatnonzero((rho <= 0).any(axis=1))[0]]
        raise InvalidArgumentError(f"KSG found duplicate points for node pair ({i}, {bad})")

    n_x = (dx[None] <= rho[..., None]).sum(axis=-1) - 1
    n_y = (dy <= rho[..., None]).sum(axis=-1) - 1
    return _ksg_formula(k, n, n_x, n_y, axis=-1)


def ksg_mi_matrix(data: Dataset, k: Optional[int] = None, seed: int = 0) -> SimilarityMatrix:
    """
    KSG MI matrix

    Ties diputus dengan jitter deterministik; nilai negatif kecil dipertahankan.

    Args:
        data: Dataset
        k: Jumlah nearest neighbour (default 5)
        seed: Seed untuk jitter
    """
    k = k or SIMILARITY_CONFIG["ksg_k"]
    n, p = data.n, data.p
    if not 0 < k < n:
        raise InvalidArgumentError(f"KSG needs 0 < k < n, got k={k}, n={n}")

    values = _node_jitter(data.values, seed)
    mi = np.zeros((p, p))
    dense = n <= SIMILARITY_CONFIG["ksg_dense_limit"]
    batch = max(1, _BATCH_BUDGET // (n * n))

    for i in range(p - 1):
        if data.flagged[i]:
            continue
        targets = np.arange(i + 1, p)
        targets = targets[~data.flagged[targets]]
        if dense:
            for start in range(0, targets.size, batch):
                chunk = targets[start:start + batch]
                mi[i, chunk] = _ksg_dense_row(values, i, chunk, k)
        else:
            for j in targets:
                mi[i, j] = ksg_mi(values[i], values[j], k, pair=(i, int(j)))

    mi = mi + mi.T
    return SimilarityMatrix(
        entries=mi,
        estimator="mi_ksg",
        n=n,
        flagged=data.flagged.copy(),
        metadata={"k": k, "jitter": SIMILARITY_CONFIG["ksg_jitter"], "jitter_seed": seed},
    )
