"""
Comparison - Ground truth network, FDR, Frobenius error, differing fraction
"""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Union
import json
import logging

import numpy as np
from scipy.stats import norm

from app.exceptions import InvalidArgumentError, UndefinedResultError
from app.field.autocorr import asymptotic_variance
from app.field.covariance import MaternParams
from app.grid.sphere_grid import SphereGrid
from app.network.builder import build_network
from app.network.graph import Network, to_jsonable
from app.similarity.base import SimilarityMatrix
from app.similarity.correlation import ground_truth_similarity
from app.surrogates.baseline import EdgeBaseline

logger = logging.getLogger(__name__)


def analytic_baseline(p: int, n: int, levels: Iterable[float], autocorr=None) -> EdgeBaseline:
    """
    Null distribution empirical Pearson dari teori large-sample

    Per edge: mean 0, std sqrt(sigma^2_{a_i,a_j} / n), quantile Phi^-1(level) * std.
    """
    if n < 2:
        raise InvalidArgumentError(f"n must be >= 2, got {n}")
    a = np.zeros(p) if autocorr is None else np.broadcast_to(np.asarray(autocorr, dtype=float), (p,))
    std = np.sqrt(asymptotic_variance(a[:, None], a[None, :]) / n)
    levels = sorted(float(level) for level in levels)
    for level in levels:
        if not 0.0 < level < 1.0:
            raise InvalidArgumentError(f"level must lie in (0, 1), got {level}")
    return EdgeBaseline(
        mean=np.zeros((p, p)),
        std=std,
        quantiles={level: norm.ppf(level) * std for level in levels},
        method="analytic",
        m=0,
        estimator="ground_truth",
        metadata={"n": n},
    )


def ground_truth_network(
    grid: SphereGrid,
    params: MaternParams,
    scheme: str,
    weighted: bool = False,
    marginal: str = "gaussian",
    sigma2: Optional[float] = None,
    truth: Optional[SimilarityMatrix] = None,
    **scheme_params,
) -> Network:
    """
    Network dari similarity analitik (tanpa seed)

    Args:
        grid: Grid
        params: Parameter Matern
        scheme: density | threshold | knn | zscore | quantile
        weighted: Weighted network
        marginal: gaussian | lognormal
        sigma2: sigma^2 untuk marginal lognormal
        truth: Ground truth similarity yang sudah dihitung (opsional)
        **scheme_params: Parameter scheme; zscore/quantile tanpa `baseline`
            memakai analytic_baseline dengan `n` (dan `autocorr` opsional)

    Returns:
        Network ground truth
    """
    if truth is None:
        truth = ground_truth_similarity(grid, params, marginal, sigma2)
    if scheme in ("zscore", "quantile") and "baseline" not in scheme_params:
        if "n" not in scheme_params:
            raise InvalidArgumentError(f"ground truth '{scheme}' network needs `n` or a baseline")
        n = int(scheme_params.pop("n"))
        autocorr = scheme_params.pop("autocorr", None)
        levels = [scheme_params["level"]] if "level" in scheme_params else []
        scheme_params["baseline"] = analytic_baseline(truth.p, n, levels, autocorr)

    net = build_network(truth, scheme, weighted, grid, **scheme_params)
    net.metadata["ground_truth"] = params.label
    return net


def _check_same_nodes(a: Network, b: Network):
    if a.p != b.p:
        raise InvalidArgumentError(f"networks have different node counts ({a.p} vs {b.p})")
    if a.grid is not None and b.grid is not None and not np.array_equal(a.grid.points, b.grid.points):
        raise InvalidArgumentError("networks live on different grids")


def false_discovery_rate(empirical: Network, truth: Network) -> float:
    """
    Fraksi edge empiris yang tidak ada di ground truth

    Network empiris kosong memberi 0 (dengan warning).
    """
    _check_same_nodes(empirical, truth)
    emp = empirical.edge_mask()
    if not emp.any():
        logger.warning("Empty empirical network, FDR defined as 0")
        return 0.0
    return float((emp & ~truth.edge_mask()).sum() / emp.sum())


def missing_edge_rate(empirical: Network, truth: Network) -> float:
    """Fraksi edge ground truth yang tidak ada di network empiris"""
    _check_same_nodes(empirical, truth)
    true_edges = truth.edge_mask()
    if not true_edges.any():
        return 0.0
    return float((true_edges & ~empirical.edge_mask()).sum() / true_edges.sum())


def frobenius_error(est: SimilarityMatrix, truth: SimilarityMatrix, per_edge_rms: bool = False) -> float:
    """
    Error Frobenius similarity estimate terhadap ground truth (tanpa diagonal)

    per_edge_rms=True memberi root mean squared error per edge.
    """
    if est.p != truth.p:
        raise InvalidArgumentError(f"dimension mismatch ({est.p} vs {truth.p})")
    diff = est.upper_triangle() - truth.upper_triangle()
    upper_norm = float(np.sqrt(np.sum(diff ** 2)))
    if per_edge_rms:
        return upper_norm / np.sqrt(diff.size) if diff.size else 0.0
    return float(np.sqrt(2.0) * upper_norm)


def differing_fraction(net_a: Network, net_b: Network) -> float:
    """
    |E_a sym-diff E_b| / |E_a|, nilai di [0, 2]

    Normalisasi memakai network pertama, sehingga tidak simetris.
    """
    _check_same_nodes(net_a, net_b)
    a, b = net_a.edge_mask(), net_b.edge_mask()
    if not a.any():
        raise UndefinedResultError("differing fraction undefined for an empty first network")
    return float((a ^ b).sum() / a.sum())


def symmetric_differing_fraction(net_a: Network, net_b: Network) -> float:
    """Rata-rata differing_fraction(a, b) dan differing_fraction(b, a)"""
    return 0.5 * (differing_fraction(net_a, net_b) + differing_fraction(net_b, net_a))


@dataclass
class ComparisonReport:
    """Perbandingan network empiris terhadap ground truth"""

    fdr: float
    precision: float
    missing_edge_rate: float
    empirical_edges: int
    truth_edges: int
    differing_fraction: Optional[float] = None
    frobenius_error: Optional[float] = None
    frobenius_rms: Optional[float] = None
    group_degrees: Dict[str, float] = field(default_factory=dict)
    metadata: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return to_jsonable(asdict(self))

    def to_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        return path


def compare_networks(
    empirical: Network,
    truth: Network,
    est: Optional[SimilarityMatrix] = None,
    truth_sim: Optional[SimilarityMatrix] = None,
) -> ComparisonReport:
    """
    Bangun ComparisonReport

    Frobenius error hanya dihitung jika kedua similarity matrix diberikan.
    """
    fdr = false_discovery_rate(empirical, truth)
    try:
        differing = differing_fraction(empirical, truth)
    except UndefinedResultError:
        differing = None

    frob = rms = None
    if est is not None and truth_sim is not None:
        frob = frobenius_error(est, truth_sim)
        rms = frobenius_error(est, truth_sim, per_edge_rms=True)

    return ComparisonReport(
        fdr=fdr,
        precision=1.0 - fdr,
        missing_edge_rate=missing_edge_rate(empirical, truth),
        empirical_edges=empirical.n_edges,
        truth_edges=truth.n_edges,
        differing_fraction=differing,
        frobenius_error=frob,
        frobenius_rms=rms,
        metadata={
            "empirical": {k: empirical.metadata.get(k) for k in ("scheme", "estimator")},
            "truth": truth.metadata.get("ground_truth"),
        },
    )
