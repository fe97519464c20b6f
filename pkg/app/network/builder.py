"""
Network Builder - Konstruksi network dari similarity matrix
"""

import math
from typing import TYPE_CHECKING, Dict
import logging

import numpy as np

from app.config import NETWORK_CONFIG
from app.exceptions import InvalidArgumentError
from app.network.graph import Network
from app.similarity.base import SimilarityMatrix

if TYPE_CHECKING:
    from app.surrogates.baseline import EdgeBaseline

logger = logging.getLogger(__name__)

SCHEMES = ("density", "threshold", "knn", "zscore", "quantile")


def _edge_values(sim: SimilarityMatrix) -> np.ndarray:
    values = sim.edge_values()
    values[~np.isfinite(values)] = -np.inf
    return values


def _weights(values: np.ndarray) -> np.ndarray:
    return np.maximum(np.abs(values), np.finfo(float).tiny)


def _assemble(p: int, rows, cols, values: np.ndarray, weighted: bool, grid, metadata: Dict) -> Network:
    adjacency = np.zeros((p, p))
    adjacency[rows, cols] = _weights(values[rows, cols]) if weighted else 1.0
    adjacency[cols, rows] = adjacency[rows, cols]
    return Network(adjacency=adjacency, grid=grid, weighted=weighted, metadata=metadata)


def _base_metadata(sim: SimilarityMatrix, scheme: str, **params) -> Dict:
    return {"scheme": scheme, "estimator": sim.estimator, **params,
            "flagged_nodes": int(sim.flagged.sum())}


def edge_count_for_density(p: int, density: float) -> int:
    """ceil(density * p(p-1)/2)"""
    if not 0.0 < density <= 1.0:
        raise InvalidArgumentError(f"density must lie in (0, 1], got {density}")
    return int(math.ceil(round(density * p * (p - 1) / 2, 9)))


def top_edges(values: np.ndarray, count: int):
    """
    `count` pasangan (i < j) dengan nilai terbesar

    Ties diputus secara leksikografis pada (i, j); nilai -inf tidak pernah dipilih.
    """
    i, j = np.triu_indices(values.shape[0], k=1)
    v = values[i, j]
    finite = np.isfinite(v)
    i, j, v = i[finite], j[finite], v[finite]
    order = np.lexsort((j, i, -v))[:count]
    return i[order], j[order]


def threshold_by_density(sim: SimilarityMatrix, density: float, weighted: bool = False, grid=None) -> Network:
    """
    Density-threshold network

    Args:
        sim: SimilarityMatrix
        density: Target density di (0, 1]
        weighted: Simpan |similarity| sebagai bobot

    Returns:
        Network dengan ceil(density * p(p-1)/2) edge terbesar
    """
    values = _edge_values(sim)
    count = edge_count_for_density(sim.p, density)
    rows, cols = top_edges(values, count)
    cut = float(values[rows[-1], cols[-1]]) if rows.size else None
    metadata = _base_metadata(sim, "density", density=density, requested_edges=count, threshold=cut)
    return _assemble(sim.p, rows, cols, values, weighted, grid, metadata)


def threshold_by_value(sim: SimilarityMatrix, tau: float, weighted: bool = False, grid=None) -> Network:
    """Edge iff S_ij >= tau"""
    values = _edge_values(sim)
    rows, cols = np.nonzero(np.triu(values >= tau, k=1))
    metadata = _base_metadata(sim, "threshold", tau=tau)
    return _assemble(sim.p, rows, cols, values, weighted, grid, metadata)


def knn_graph(sim: SimilarityMatrix, k: int, weighted: bool = False, grid=None) -> Network:
    """
    Symmetric kNN graph (union)

    Edge (i, j) ada jika j termasuk top-k dari i atau sebaliknya. Ties diputus
    berdasarkan index node terkecil.
    """
    p = sim.p
    if not 0 < k < p:
        raise InvalidArgumentError(f"k must lie in [1, {p - 1}], got {k}")
    values = _edge_values(sim)
    selected = np.zeros((p, p), dtype=bool)
    columns = np.arange(p)
    for i in range(p):
        row = values[i]
        order = np.lexsort((columns, -row))[:k]
        order = order[np.isfinite(row[order])]
        selected[i, order] = True

    selected = selected | selected.T
    rows, cols = np.nonzero(np.triu(selected, k=1))
    metadata = _base_metadata(sim, "knn", k=k)
    return _assemble(p, rows, cols, values, weighted, grid, metadata)


def zscore_network(
    sim: SimilarityMatrix,
    baseline: "EdgeBaseline",
    density: float,
    weighted: bool = False,
    grid=None,
) -> Network:
    """
    Density-threshold pada z-score (S - mu0) / sigma0

    Edge dengan sigma0 < degenerate_sigma dikeluarkan dan dilaporkan.
    """
    if baseline.p != sim.p:
        raise InvalidArgumentError("baseline does not cover all edges of the similarity matrix")
    values = _edge_values(sim)
    degenerate = baseline.std < NETWORK_CONFIG["degenerate_sigma"]
    iu = np.triu_indices(sim.p, k=1)
    if degenerate[iu].all():
        raise InvalidArgumentError("all edges have a degenerate baseline standard deviation")

    with np.errstate(divide="ignore", invalid="ignore"):
        z = (values - baseline.mean) / np.where(degenerate, 1.0, baseline.std)
    z[degenerate] = -np.inf
    z[~np.isfinite(z)] = -np.inf

    count = edge_count_for_density(sim.p, density)
    rows, cols = top_edges(z, count)
    n_degenerate = int(degenerate[iu].sum())
    if n_degenerate:
        logger.warning(f"{n_degenerate} edges excluded from z-score network (degenerate baseline)")
    metadata = _base_metadata(
        sim, "zscore", density=density, requested_edges=count,
        baseline_method=baseline.method, baseline_m=baseline.m, degenerate_edges=n_degenerate,
    )
    return _assemble(sim.p, rows, cols, z, weighted, grid, metadata)


def quantile_network(
    sim: SimilarityMatrix,
    baseline: "EdgeBaseline",
    level: float,
    weighted: bool = False,
    grid=None,
) -> Network:
    """Edge iff S_ij > q_level(edge)"""
    if baseline.p != sim.p:
        raise InvalidArgumentError("baseline does not cover all edges of the similarity matrix")
    threshold = baseline.quantile(level)
    values = _edge_values(sim)
    rows, cols = np.nonzero(np.triu(values > threshold, k=1))
    metadata = _base_metadata(sim, "quantile", level=level, baseline_method=baseline.method,
                              baseline_m=baseline.m)
    return _assemble(sim.p, rows, cols, values, weighted, grid, metadata)


def build_network(sim: SimilarityMatrix, scheme: str, weighted: bool = False, grid=None, **params) -> Network:
    """
    Dispatch konstruksi berdasarkan nama scheme

    Args:
        sim: SimilarityMatrix
        scheme: density | threshold | knn | zscore | quantile
        weighted: Weighted network
        **params: density / tau / k / baseline / level
    """
    try:
        if scheme == "density":
            return threshold_by_density(sim, params["density"], weighted, grid)
        if scheme == "threshold":
            return threshold_by_value(sim, params["tau"], weighted, grid)
        if scheme == "knn":
            return knn_graph(sim, int(params["k"]), weighted, grid)
        if scheme == "zscore":
            return zscore_network(sim, params["baseline"], params["density"], weighted, grid)
        if scheme == "quantile":
            return quantile_network(sim, params["baseline"], params["level"], weighted, grid)
    except KeyError as e:
        raise InvalidArgumentError(f"scheme '{scheme}' needs parameter {e}") from None
    raise InvalidArgumentError(f"Unknown scheme '{scheme}', expected one of {SCHEMES}")
