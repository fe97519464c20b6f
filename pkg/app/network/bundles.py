"""
Link Bundles - Deteksi bundle one-to-many, many-to-many, dan locally weighted
"""

from dataclasses import dataclass
from typing import Literal, Optional, Tuple
import logging

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import norm

from app.config import BUNDLE_CONFIG
from app.exceptions import InvalidArgumentError
from app.grid.sphere_grid import SphereGrid, ball_membership, distance_matrix, epsilon_ball, great_circle_angle
from app.network.graph import Network

logger = logging.getLogger(__name__)

BUNDLE_KINDS = ("one_to_many", "many_to_many", "locally_weighted")
LINK_FILTERS = ("all", "longer_than", "false_links", "differing_links")


class BundleSpec(BaseModel):
    """(eps, c) bundle definition"""

    model_config = ConfigDict(frozen=True)

    eps: float = Field(default=BUNDLE_CONFIG["eps"], gt=0)
    c: float = Field(default=BUNDLE_CONFIG["c"], gt=0, le=1)
    kind: Literal["one_to_many", "many_to_many", "locally_weighted"] = "many_to_many"


def _overlap_weight(weights: np.ndarray, members_i: np.ndarray, members_j: np.ndarray) -> float:
    """Setengah bobot di dalam irisan ball (pasangan di irisan terhitung dua kali)"""
    shared = np.flatnonzero(members_i & members_j)
    if shared.size == 0:
        return 0.0
    return 0.5 * float(weights[np.ix_(shared, shared)].sum())


def neighborhood_weight(net: Network, grid: SphereGrid, i: int, j: int, eps: float) -> Tuple[float, int]:
    """
    Bobot kumulatif antara B_eps(v_i) dan B_eps(v_j)

    Pasangan dihitung tak berurutan {k, l} dengan k di B_i, l di B_j, k != l.

    Returns:
        Tuple (W_eps, rho_eps); rho_eps(v, v) = C(|B_eps(v)|, 2)
    """
    if eps <= 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    ball_i = np.array(sorted(epsilon_ball(grid, i, eps)))
    ball_j = np.array(sorted(epsilon_ball(grid, j, eps)))
    weights = np.abs(net.adjacency)

    members_i = np.zeros(net.p, dtype=bool)
    members_j = np.zeros(net.p, dtype=bool)
    members_i[ball_i] = True
    members_j[ball_j] = True

    shared = int((members_i & members_j).sum())
    rho = ball_i.size * ball_j.size - shared * (shared + 1) // 2
    total = float(weights[np.ix_(ball_i, ball_j)].sum()) - _overlap_weight(weights, members_i, members_j)
    return total, int(rho)


@dataclass
class BundleMatrices:
    """Flag bundle dan pasangan degenerate (rho = 0) untuk semua pasangan node"""

    flags: np.ndarray
    degenerate: np.ndarray
    spec: BundleSpec


def _cross_weights(net: Network, grid: SphereGrid, eps: float):
    """W dan rho untuk semua pasangan node"""
    weights = np.abs(net.adjacency)
    members = ball_membership(grid, eps)
    b = members.astype(float)
    sizes = b.sum(axis=1)
    overlap = b @ b.T

    total = b @ weights @ b.T
    rho = np.outer(sizes, sizes) - overlap * (overlap + 1) / 2
    rows, cols = np.nonzero(np.triu(overlap > 0))
    for i, j in zip(rows, cols):
        correction = _overlap_weight(weights, members[i], members[j])
        total[i, j] -= correction
        if i != j:
            total[j, i] -= correction
    return total, rho, members


def bundle_matrices(net: Network, grid: SphereGrid, spec: BundleSpec) -> BundleMatrices:
    """Evaluasi is_bundle untuk semua pasangan sekaligus"""
    p = net.p
    if spec.kind == "one_to_many":
        weights = np.abs(net.adjacency)
        members = ball_membership(grid, spec.eps)
        b = members.astype(float)
        incident = b @ weights
        # k = j dikeluarkan dari rata-rata
        count = b.sum(axis=1)[:, None] - members.astype(float)
        valid = count > 0
        mean = np.divide(incident, count, out=np.zeros((p, p)), where=valid)
        directional = valid & (mean >= spec.c)
        flags = directional | directional.T
        degenerate = ~valid & ~valid.T
    else:
        total, rho, _ = _cross_weights(net, grid, spec.eps)
        valid = rho > 0
        ratio = np.divide(total, rho, out=np.zeros((p, p)), where=valid)
        if spec.kind == "many_to_many":
            flags = valid & (ratio >= spec.c)
            degenerate = ~valid
        else:
            intra = np.diag(ratio)
            intra_valid = np.diag(valid)
            threshold = 0.5 * spec.c * (intra[:, None] + intra[None, :])
            pair_valid = valid & intra_valid[:, None] & intra_valid[None, :]
            flags = pair_valid & (ratio >= threshold)
            degenerate = ~pair_valid

    np.fill_diagonal(flags, False)
    np.fill_diagonal(degenerate, False)
    return BundleMatrices(flags=flags, degenerate=degenerate, spec=spec)


def is_bundle(net: Network, grid: SphereGrid, i: int, j: int, spec: BundleSpec) -> bool:
    """
    Apakah pasangan (i, j) membentuk link bundle

    many_to_many: W / rho >= c. one_to_many: rata-rata bobot dari B_eps(v_i)
    ke v_j >= c, dievaluasi dua arah (OR). locally_weighted: W / rho >=
    (c / 2) (densitas intra-ball i + densitas intra-ball j).
    """
    if spec.kind == "one_to_many":
        weights = np.abs(net.adjacency)
        found_valid = False
        for source, target in ((i, j), (j, i)):
            ball = [k for k in epsilon_ball(grid, source, spec.eps) if k != target]
            if not ball:
                continue
            found_valid = True
            if weights[ball, target].mean() >= spec.c:
                return True
        if not found_valid:
            logger.warning(f"Degenerate one-to-many geometry for pair ({i}, {j})")
        return False

    total, rho = neighborhood_weight(net, grid, i, j, spec.eps)
    if rho == 0:
        logger.warning(f"Degenerate bundle geometry (rho = 0) for pair ({i}, {j})")
        return False
    if spec.kind == "many_to_many":
        return total / rho >= spec.c

    intra = []
    for node in (i, j):
        w, r = neighborhood_weight(net, grid, node, node, spec.eps)
        if r == 0:
            logger.warning(f"Degenerate bundle geometry (single-node ball) at node {node}")
            return False
        intra.append(w / r)
    return total / rho >= 0.5 * spec.c * (intra[0] + intra[1])


@dataclass
class BundleScan:
    max_bundle_length: float
    fraction_in_bundles: float
    bundle_pairs: int
    filtered_links: int
    skipped_pairs: int


def _filtered_links(net: Network, grid: SphereGrid, link_filter: str,
                    reference: Optional[Network], length: Optional[float]) -> np.ndarray:
    """Boolean upper-triangle matrix link yang masuk filter"""
    present = np.triu(net.adjacency > 0, k=1)
    if link_filter == "all":
        return present
    if link_filter == "longer_than":
        length = BUNDLE_CONFIG["teleconnection_length"] if length is None else length
        return present & (distance_matrix(grid) > length)
    if reference is None:
        raise InvalidArgumentError(f"link filter '{link_filter}' needs a reference network")
    if reference.p != net.p:
        raise InvalidArgumentError("reference network has a different node count")
    other = np.triu(reference.adjacency > 0, k=1)
    if link_filter == "false_links":
        return present & ~other
    if link_filter == "differing_links":
        return present ^ other
    raise InvalidArgumentError(f"Unknown link filter '{link_filter}', expected one of {LINK_FILTERS}")


def bundle_scan(
    net: Network,
    grid: SphereGrid,
    spec: BundleSpec,
    link_filter: str = "all",
    reference: Optional[Network] = None,
    length: Optional[float] = None,
) -> BundleScan:
    """
    Scan semua pasangan node untuk bundle

    Args:
        net: Network
        grid: Grid
        spec: BundleSpec
        link_filter: all | longer_than | false_links | differing_links
        reference: Network pembanding untuk false_links / differing_links
        length: Batas panjang untuk longer_than (default teleconnection length)

    Returns:
        BundleScan (max panjang bundle, fraksi link terfilter yang ada di bundle)
    """
    filtered = _filtered_links(net, grid, link_filter, reference, length)
    if net.n_edges == 0:
        return BundleScan(0.0, 0.0, 0, int(filtered.sum()), 0)

    matrices = bundle_matrices(net, grid, spec)
    upper = np.triu(np.ones((net.p, net.p), dtype=bool), k=1)
    positive = matrices.flags & upper
    skipped = int((matrices.degenerate & upper).sum())
    if skipped:
        logger.warning(f"{skipped} node pairs skipped for degenerate bundle geometry")

    distances = distance_matrix(grid)
    max_length = float(distances[positive].max()) if positive.any() else 0.0
    n_filtered = int(filtered.sum())
    fraction = float((positive & filtered).sum() / n_filtered) if n_filtered else 0.0
    return BundleScan(max_length, fraction, int(positive.sum()), n_filtered, skipped)


def bundle_report_frame(net: Network, grid: SphereGrid, spec: BundleSpec) -> pd.DataFrame:
    """Bundle report per edge: i,j,kind,eps,c,bundle_flag,length"""
    i, j = net.edges()
    flags = bundle_matrices(net, grid, spec).flags if i.size else np.zeros((net.p, net.p), dtype=bool)
    return pd.DataFrame({
        "i": i,
        "j": j,
        "kind": spec.kind,
        "eps": spec.eps,
        "c": spec.c,
        "bundle_flag": flags[i, j].astype(int),
        "length": distance_matrix(grid)[i, j],
    })


def edge_distance(e1: Tuple[int, int], e2: Tuple[int, int], grid: SphereGrid) -> float:
    """
    Jarak antar edge

    min{ d(x1, x2) + d(y1, y2), d(x1, y2) + d(y1, x2) }
    """
    points = grid.points
    for node in (*e1, *e2):
        if not 0 <= node < grid.size:
            raise InvalidArgumentError(f"Node index {node} out of range")
    (x1, y1), (x2, y2) = e1, e2

    def d(a: int, b: int) -> float:
        return great_circle_angle(points[a], points[b])

    return min(d(x1, x2) + d(y1, y2), d(x1, y2) + d(y1, x2))


def conditional_link_probability_bound(mu, sigma, tau: float, eps_shift: float) -> float:
    """
    Lower bound P(S1 > tau | S2 > tau + eps) untuk (S1, S2) bivariate normal

    Raises:
        InvalidArgumentError: sigma tidak PSD atau |rho| = 1
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if mu.shape != (2,) or sigma.shape != (2, 2):
        raise InvalidArgumentError("mu must be a 2-vector and sigma a 2x2 matrix")
    if not np.allclose(sigma, sigma.T) or np.linalg.eigvalsh(sigma)[0] < -1e-12:
        raise InvalidArgumentError("sigma must be symmetric positive semi-definite")

    sigma1, sigma2 = np.sqrt(sigma[0, 0]), np.sqrt(sigma[1, 1])
    if sigma1 <= 0 or sigma2 <= 0:
        raise InvalidArgumentError("sigma must have positive variances")
    rho = sigma[0, 1] / (sigma1 * sigma2)
    if abs(rho) >= 1.0:
        raise InvalidArgumentError(f"correlation must satisfy |rho| < 1, got {rho}")

    numerator = sigma1 / sigma2 * rho * (tau + eps_shift - mu[1]) + mu[0] - tau
    return float(norm.cdf(numerator / (np.sqrt(1.0 - rho ** 2) * sigma1)))
