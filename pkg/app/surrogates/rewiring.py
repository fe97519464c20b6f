"""
Rewiring - Null model network dengan degree sequence tetap
"""

from dataclasses import replace
from typing import Callable, Optional
import logging

import networkx as nx
import numpy as np

from app.config import SURROGATE_CONFIG
from app.exceptions import InvalidArgumentError
from app.grid.sphere_grid import SphereGrid, distance_matrix
from app.network.graph import Network

logger = logging.getLogger(__name__)


def _default_swaps(net: Network, n_swaps: Optional[int]) -> int:
    if n_swaps is None:
        return SURROGATE_CONFIG["swaps_per_edge"] * net.n_edges
    if n_swaps < 0:
        raise InvalidArgumentError(f"n_swaps must be non-negative, got {n_swaps}")
    return int(n_swaps)


def _double_edge_swaps(
    net: Network,
    n_swaps: int,
    seed: int,
    accept: Callable[[int, int, int, int], bool],
    method: str,
) -> Network:
    """
    Double-edge swap (a, b), (c, d) -> (a, d), (c, b)
    dengan syarat tambahan `accept` (dipakai geomodel2_rewire)

    Swap ditolak jika membuat self-loop, multi-edge, atau ditolak `accept`
    (argumen: a, b yang diganti a, d; lalu c, d yang diganti c, b).
    """
    if net.weighted:
        raise InvalidArgumentError("rewiring needs an unweighted network")
    i, j = net.edges()
    if i.size < 2:
        logger.warning(f"Network has {i.size} edges, too few to swap; returning input")
        return replace(net, metadata={**net.metadata, "rewiring": method, "accepted_swaps": 0,
                                      "attempted_swaps": 0, "acceptance_rate": 0.0})

    edges = np.column_stack([i, j])
    present = net.adjacency > 0
    rng = np.random.default_rng(seed)
    max_tries = int(min(SURROGATE_CONFIG["max_swaps"], 100 * max(n_swaps, 1)))

    accepted = attempted = 0
    while accepted < n_swaps and attempted < max_tries:
        attempted += 1
        e1, e2 = rng.choice(len(edges), size=2, replace=False)
        a, b = edges[e1]
        c, d = edges[e2]
        if rng.random() < 0.5:
            c, d = d, c
        if a == d or c == b or present[a, d] or present[c, b]:
            continue
        if not accept(a, b, c, d):
            continue

        present[a, b] = present[b, a] = present[c, d] = present[d, c] = False
        present[a, d] = present[d, a] = present[c, b] = present[b, c] = True
        edges[e1] = (a, d)
        edges[e2] = (c, b)
        accepted += 1

    if accepted < n_swaps:
        logger.warning(f"{method}: only {accepted}/{n_swaps} swaps accepted after {attempted} tries")
    rate = accepted / attempted if attempted else 0.0
    logger.info(f"{method}: {accepted} swaps accepted ({rate:.1%} acceptance)")
    metadata = {**net.metadata, "rewiring": method, "seed": seed, "requested_swaps": n_swaps,
                "accepted_swaps": accepted, "attempted_swaps": attempted, "acceptance_rate": rate}
    return Network(adjacency=present.astype(float), grid=net.grid, weighted=False, metadata=metadata)


def degree_preserving_rewire(net: Network, n_swaps: Optional[int] = None, seed: int = 0) -> Network:
    """
    Randomisasi network dengan degree sequence tetap

    Swap dikerjakan oleh networkx.double_edge_swap pada salinan graph.

    Args:
        net: Network unweighted
        n_swaps: Jumlah swap yang diterima (default swaps_per_edge * |E|)
        seed: Seed RNG

    Returns:
        Network baru; degree setiap node identik dengan input
    """
    if net.weighted:
        raise InvalidArgumentError("rewiring needs an unweighted network")
    n_swaps = _default_swaps(net, n_swaps)
    if n_swaps == 0 or net.n_edges < 2 or net.p < 4:
        if n_swaps:
            logger.warning(f"Network has {net.n_edges} edges on {net.p} nodes, too few to swap; returning input")
        return replace(net, metadata={**net.metadata, "rewiring": "degree_preserving", "seed": seed,
                                      "requested_swaps": n_swaps, "accepted_swaps": 0, "completed": not n_swaps})

    graph = net.to_networkx()
    max_tries = int(min(SURROGATE_CONFIG["max_swaps"], 100 * n_swaps))
    completed = True
    try:
        nx.double_edge_swap(graph, nswap=n_swaps, max_tries=max_tries, seed=seed)
    except nx.NetworkXAlgorithmError as e:
        # graph keeps the swaps done before max_tries ran out
        completed = False
        logger.warning(f"degree_preserving: {e}")
    logger.info(f"degree_preserving: {n_swaps} swaps requested, completed={completed}")
    metadata = {**net.metadata, "rewiring": "degree_preserving", "seed": seed, "requested_swaps": n_swaps,
                "accepted_swaps": n_swaps if completed else None, "max_tries": max_tries, "completed": completed}
    return Network.from_networkx(graph, grid=net.grid, metadata=metadata)


def geomodel2_rewire(
    net: Network,
    grid: SphereGrid,
    eps: Optional[float] = None,
    n_swaps: Optional[int] = None,
    seed: int = 0,
) -> Network:
    """
    Rewiring yang menjaga degree dan (kira-kira) panjang link

    Swap hanya diterima jika setiap link pengganti berbeda panjang paling
    banyak eps radian dari link yang digantikannya.
    """
    eps = SURROGATE_CONFIG["geomodel_eps"] if eps is None else eps
    if eps < 0:
        raise InvalidArgumentError(f"eps must be non-negative, got {eps}")
    if grid.size != net.p:
        raise InvalidArgumentError("grid size does not match network")
    n_swaps = _default_swaps(net, n_swaps)
    distances = distance_matrix(grid)

    def accept(a: int, b: int, c: int, d: int) -> bool:
        return (abs(distances[a, d] - distances[a, b]) <= eps
                and abs(distances[c, b] - distances[c, d]) <= eps)

    rewired = _double_edge_swaps(net, n_swaps, seed, accept, "geomodel2")
    rewired.metadata["length_tolerance"] = eps
    return rewired
