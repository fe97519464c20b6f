"""
Network Measures - Degree, clustering, betweenness, shortest path, link length, curvature, MAD
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Tuple, Union
import json
import logging

import networkx as nx
import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from app.config import BUNDLE_CONFIG, LAB_CONFIG
from app.exceptions import InvalidArgumentError
from app.grid.sphere_grid import SphereGrid, ball_membership, distance_matrix
from app.network.graph import Network, to_jsonable

logger = logging.getLogger(__name__)

MEASURES = ("degree", "clustering", "betweenness", "shortest_path", "link_length", "curvature", "mad")


def degrees(net: Network, normalized: bool = False) -> np.ndarray:
    """Row sum adjacency; normalized dibagi (p - 1)"""
    deg = net.adjacency.sum(axis=1)
    if normalized:
        deg = deg / max(net.p - 1, 1)
    return deg


def clustering(net: Network, weighted: bool = False) -> np.ndarray:
    """
    Clustering coefficient per node

    Unweighted: 2 T_i / (d_i (d_i - 1)). Weighted: bentuk Onnela (geometric
    mean dari bobot yang dinormalisasi dengan bobot maksimum).
    """
    graph = net.to_networkx() if weighted else net.binarized().to_networkx()
    values = nx.clustering(graph, weight="weight" if weighted else None)
    return np.array([values[i] for i in range(net.p)], dtype=float)


def betweenness(net: Network) -> np.ndarray:
    """Betweenness ternormalisasi dengan (p - 1)(p - 2) / 2 pada network unweighted"""
    graph = net.binarized().to_networkx()
    values = nx.betweenness_centrality(graph, normalized=True)
    return np.array([values[i] for i in range(net.p)], dtype=float)


def shortest_path_lengths(net: Network) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mean hop distance per node ke node yang terjangkau

    Returns:
        Tuple (mean finite hop distance, unreachable count); node tanpa
        tetangga terjangkau mendapat NaN
    """
    hops = shortest_path(csr_matrix((net.adjacency > 0).astype(float)), directed=False, unweighted=True)
    np.fill_diagonal(hops, np.nan)
    finite = np.isfinite(hops)
    reachable = finite.sum(axis=1)
    total = np.where(finite, hops, 0.0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(reachable > 0, total / np.maximum(reachable, 1), np.nan)
    unreachable = (net.p - 1) - reachable
    return means, unreachable.astype(int)


def edge_lengths(net: Network, grid: SphereGrid) -> np.ndarray:
    """Great-circle length per edge (urutan Network.edges)"""
    i, j = net.edges()
    return distance_matrix(grid)[i, j]


def length_bin_edges(bins: int) -> np.ndarray:
    if bins < 1:
        raise InvalidArgumentError(f"bins must be >= 1, got {bins}")
    return np.linspace(0.0, np.pi, bins + 1)


def link_length_histogram(
    net: Network,
    grid: SphereGrid,
    bins: int = None,
    normalized_by_available: bool = False,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Histogram panjang link di [0, pi]

    Normalized: count per bin dibagi jumlah pasangan yang tersedia di bin
    tersebut (bin tanpa pasangan bernilai 0).

    Returns:
        Tuple (bin_edges, values)
    """
    bin_edges = length_bin_edges(bins or LAB_CONFIG["length_bins"])
    counts, _ = np.histogram(edge_lengths(net, grid), bins=bin_edges)
    if not normalized_by_available:
        return bin_edges, counts.astype(float)

    iu = np.triu_indices(grid.size, k=1)
    available, _ = np.histogram(distance_matrix(grid)[iu], bins=bin_edges)
    ratio = np.divide(counts, available, out=np.zeros(len(counts)), where=available > 0)
    return bin_edges, ratio


def link_length_summary(net: Network, grid: SphereGrid, teleconnection_length: float = None) -> Dict[str, float]:
    """Mean/max link length dan jumlah teleconnection"""
    teleconnection_length = teleconnection_length or BUNDLE_CONFIG["teleconnection_length"]
    lengths = edge_lengths(net, grid)
    if lengths.size == 0:
        return {"mean_length": 0.0, "max_length": 0.0, "teleconnections": 0}
    return {
        "mean_length": float(lengths.mean()),
        "max_length": float(lengths.max()),
        "teleconnections": int((lengths > teleconnection_length).sum()),
    }


def forman_curvature(net: Network) -> np.ndarray:
    """Augmented Forman curvature 4 - d_i - d_j + 3 t_ij per edge"""
    binary = (net.adjacency > 0).astype(float)
    deg = binary.sum(axis=1)
    i, j = net.edges()
    triangles = np.einsum("ek,ek->e", binary[i], binary[j])
    return 4.0 - deg[i] - deg[j] + 3.0 * triangles


def mad_ball(
    net: Network,
    grid: SphereGrid,
    eps: float = None,
    seed: int = 0,
    shuffles: int = None,
) -> Tuple[float, float, float]:
    """
    Maximal average degree dalam eps-ball dibanding degree yang dipermutasi

    Radius default LAB_CONFIG["mad_eps"] (10 derajat), terpisah dari radius bundle.

    Returns:
        Tuple (mad, rata-rata mad setelah shuffle, ratio)
    """
    if eps is None:
        eps = LAB_CONFIG["mad_eps"]
    if eps <= 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    shuffles = shuffles or LAB_CONFIG["mad_shuffles"]
    members = ball_membership(grid, eps).astype(float)
    sizes = members.sum(axis=1)
    deg = degrees(net)

    mad = float(np.max(members @ deg / sizes))
    rng = np.random.default_rng(seed)
    permuted = np.stack([rng.permutation(deg) for _ in range(shuffles)], axis=1)
    shuffled = float(np.mean(np.max(members @ permuted / sizes[:, None], axis=0)))

    if shuffled == 0.0:
        return mad, shuffled, 1.0
    return mad, shuffled, mad / shuffled


@dataclass
class MeasureReport:
    """Per-node, per-edge, histogram, dan scalar hasil pengukuran"""

    nodes: pd.DataFrame
    edges: pd.DataFrame
    histograms: Dict[str, Dict[str, list]] = field(default_factory=dict)
    scalars: Dict[str, float] = field(default_factory=dict)

    def to_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {"scalars": to_jsonable(self.scalars), "histograms": to_jsonable(self.histograms)}
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True)
        return path

    def to_csv(self, directory: Union[str, Path]) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.nodes.to_csv(directory / "nodes.csv", index=False)
        self.edges.to_csv(directory / "edges.csv", index=False)
        return directory


def measure_report(
    net: Network,
    grid: SphereGrid,
    measures: Iterable[str] = MEASURES,
    bins: int = None,
    eps: float = None,
    seed: int = 0,
    shuffles: int = None,
) -> MeasureReport:
    """
    Hitung measure yang diminta dan rangkum dalam MeasureReport

    Args:
        net: Network
        grid: Grid
        measures: Subset dari MEASURES
        bins: Jumlah bin histogram link length
        eps: Radius untuk MAD
        seed: Seed shuffle MAD
        shuffles: Jumlah shuffle MAD
    """
    measures = list(measures)
    unknown = set(measures) - set(MEASURES)
    if unknown:
        raise InvalidArgumentError(f"Unknown measures {sorted(unknown)}")

    nodes = pd.DataFrame({"node": np.arange(net.p)})
    i, j = net.edges()
    edges = pd.DataFrame({"i": i, "j": j})
    histograms, scalars = {}, {"n_edges": net.n_edges, "density": net.density}

    if "degree" in measures:
        nodes["degree"] = degrees(net.binarized(), normalized=True)
        nodes["weighted_degree"] = degrees(net, normalized=True)
        scalars["mean_degree"] = float(nodes["degree"].mean())
        scalars["mean_weighted_degree"] = float(nodes["weighted_degree"].mean())
    if "clustering" in measures:
        nodes["clustering"] = clustering(net)
        scalars["mean_clustering"] = float(nodes["clustering"].mean())
        if net.weighted:
            nodes["weighted_clustering"] = clustering(net, weighted=True)
            scalars["mean_weighted_clustering"] = float(nodes["weighted_clustering"].mean())
    if "betweenness" in measures:
        nodes["betweenness"] = betweenness(net)
        scalars["max_betweenness"] = float(nodes["betweenness"].max())
    if "shortest_path" in measures:
        means, unreachable = shortest_path_lengths(net)
        nodes["mean_shortest_path"] = means
        nodes["unreachable"] = unreachable
        scalars["mean_shortest_path"] = float(np.nanmean(means)) if np.isfinite(means).any() else None
        scalars["unreachable_pairs"] = int(unreachable.sum() // 2)
    if "link_length" in measures:
        edges["length"] = edge_lengths(net, grid)
        for normalized in (False, True):
            bin_edges, values = link_length_histogram(net, grid, bins, normalized)
            name = "link_length_normalized" if normalized else "link_length"
            histograms[name] = {"bin_edges": bin_edges.tolist(), "values": values.tolist()}
        scalars.update(link_length_summary(net, grid))
    if "curvature" in measures:
        edges["curvature"] = forman_curvature(net)
        scalars["mean_curvature"] = float(edges["curvature"].mean()) if len(edges) else None
    if "mad" in measures:
        mad, shuffled, ratio = mad_ball(net, grid, eps, seed, shuffles)
        scalars.update({"mad": mad, "mad_shuffled": shuffled, "mad_ratio": ratio})

    return MeasureReport(nodes=nodes, edges=edges, histograms=histograms, scalars=scalars)
