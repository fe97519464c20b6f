"""
Summaries - Degree bias per grup autokorelasi dan korelasi lokal
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Union
import logging

import numpy as np
import pandas as pd

from app.config import LAB_CONFIG
from app.exceptions import InvalidArgumentError
from app.field.covariance import CovarianceMatrix
from app.grid.sphere_grid import SphereGrid, ball_membership, distance_matrix
from app.network.graph import Network
from app.network.measures import degrees
from app.similarity.base import SimilarityMatrix

logger = logging.getLogger(__name__)


@dataclass
class DegreeBiasReport:
    """Mean normalized degree per grup plus kurva degree vs autokorelasi"""

    group_means: Dict[str, float]
    group_sizes: Dict[str, int]
    curve: Optional[pd.DataFrame] = None
    excluded_groups: list = field(default_factory=list)


def degree_bias_report(
    net: Network,
    groups,
    expected_groups: Optional[Iterable] = None,
    bins: Optional[int] = None,
    weighted: bool = False,
) -> DegreeBiasReport:
    """
    Rata-rata normalized degree per grup node

    Args:
        net: Network
        groups: Label per node (atau nilai autokorelasi per node)
        expected_groups: Label yang diharapkan; grup kosong dikeluarkan dengan warning
        bins: Jika diberikan (dan groups numerik), kurva degree vs autokorelasi
        weighted: Pakai weighted degree

    Returns:
        DegreeBiasReport
    """
    groups = np.asarray(groups)
    if groups.shape != (net.p,):
        raise InvalidArgumentError(f"groups must label all {net.p} nodes, got shape {groups.shape}")

    deg = degrees(net if weighted else net.binarized(), normalized=True)
    labels = list(expected_groups) if expected_groups is not None else np.unique(groups).tolist()

    means, sizes, excluded = {}, {}, []
    for label in labels:
        members = groups == label
        if not members.any():
            logger.warning(f"Degree bias group {label!r} is empty, excluded")
            excluded.append(label)
            continue
        means[str(label)] = float(deg[members].mean())
        sizes[str(label)] = int(members.sum())

    curve = None
    if bins is not None:
        if not np.issubdtype(groups.dtype, np.number):
            raise InvalidArgumentError("degree curve needs numeric per-node values")
        frame = pd.DataFrame({"value": groups.astype(float), "degree": deg})
        frame["bin"] = pd.cut(frame["value"], bins=bins)
        curve = (
            frame.groupby("bin", observed=True)["degree"]
            .agg(["mean", "count"])
            .rename(columns={"mean": "mean_degree"})
            .reset_index()
        )
        curve["center"] = curve["bin"].apply(lambda interval: interval.mid).astype(float)
        curve = curve.drop(columns="bin")[["center", "mean_degree", "count"]]

    return DegreeBiasReport(group_means=means, group_sizes=sizes, curve=curve, excluded_groups=excluded)


@dataclass
class LocalCorrelationSummary:
    avg_local_corr: float
    decorrelation_lengths: Dict[float, float]
    eps: float
    c: float


def _as_correlation(sim) -> np.ndarray:
    if isinstance(sim, SimilarityMatrix):
        return sim.entries
    if isinstance(sim, CovarianceMatrix):
        return sim.correlation()
    return np.asarray(sim, dtype=float)


def decorrelation_lengths(
    corr: np.ndarray,
    distances: np.ndarray,
    tau: float,
    c: float,
    chunk: int = 256,
) -> np.ndarray:
    """
    Per node: radius terkecil di mana fraksi anggota ball yang terhubung ke
    pusat (corr >= tau) turun di bawah c. NaN jika tidak pernah turun.
    """
    p = corr.shape[0]
    out = np.full(p, np.nan)
    ranks = np.arange(1, p)
    for start in range(0, p, chunk):
        rows = np.arange(start, min(start + chunk, p))
        dist = distances[rows].copy()
        dist[np.arange(len(rows)), rows] = np.inf
        order = np.argsort(dist, axis=1, kind="stable")[:, : p - 1]
        sorted_dist = np.take_along_axis(dist, order, axis=1)
        connected = np.take_along_axis(corr[rows], order, axis=1) >= tau

        fraction = np.cumsum(connected, axis=1) / ranks
        # radius hanya valid di akhir grup jarak yang sama
        boundary = np.ones_like(connected)
        boundary[:, :-1] = sorted_dist[:, :-1] != sorted_dist[:, 1:]
        drops = (fraction < c) & boundary
        hit = drops.any(axis=1)
        first = np.argmax(drops, axis=1)
        out[rows[hit]] = sorted_dist[hit, first[hit]]
    return out


def local_correlation_summary(
    sim: Union[SimilarityMatrix, CovarianceMatrix, np.ndarray],
    grid: SphereGrid,
    eps: float,
    thresholds: Iterable[float] = None,
    c: float = None,
) -> LocalCorrelationSummary:
    """
    Rata-rata korelasi di dalam eps-ball dan decorrelation length

    Args:
        sim: Similarity / covariance / matriks korelasi p x p
        grid: Grid
        eps: Radius ball (radian)
        thresholds: tau untuk decorrelation length (default 0.2, 0.5)
        c: Minimal connectivity (default 0.8)

    Returns:
        LocalCorrelationSummary
    """
    if eps <= 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    thresholds = tuple(thresholds or LAB_CONFIG["decorrelation_thresholds"])
    c = LAB_CONFIG["decorrelation_c"] if c is None else c
    corr = _as_correlation(sim)
    if corr.shape != (grid.size, grid.size):
        raise InvalidArgumentError("similarity size does not match grid")

    members = ball_membership(grid, eps)
    np.fill_diagonal(members, False)
    counts = members.sum(axis=1)
    has_neighbours = counts > 0
    if not has_neighbours.any():
        logger.warning(f"No eps-ball at eps={eps} contains a node besides its centre")
        avg = float("nan")
    else:
        local = np.where(members, corr, 0.0).sum(axis=1)
        avg = float(np.mean(local[has_neighbours] / counts[has_neighbours]))

    distances = distance_matrix(grid)
    lengths = {}
    for tau in thresholds:
        per_node = decorrelation_lengths(corr, distances, tau, c)
        lengths[float(tau)] = float(np.nanmean(per_node)) if np.isfinite(per_node).any() else float("nan")
    return LocalCorrelationSummary(avg_local_corr=avg, decorrelation_lengths=lengths, eps=eps, c=c)
