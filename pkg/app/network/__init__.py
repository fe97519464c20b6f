"""
Network Module - Konstruksi, pengukuran, dan deteksi link bundle
"""

from app.network.graph import Network, load_network, to_jsonable
from app.network.builder import (
    SCHEMES,
    edge_count_for_density,
    top_edges,
    threshold_by_density,
    threshold_by_value,
    knn_graph,
    zscore_network,
    quantile_network,
    build_network,
)
from app.network.measures import (
    MEASURES,
    MeasureReport,
    degrees,
    clustering,
    betweenness,
    shortest_path_lengths,
    edge_lengths,
    link_length_histogram,
    link_length_summary,
    forman_curvature,
    mad_ball,
    measure_report,
)
from app.network.bundles import (
    BUNDLE_KINDS,
    LINK_FILTERS,
    BundleSpec,
    BundleScan,
    neighborhood_weight,
    is_bundle,
    bundle_matrices,
    bundle_scan,
    bundle_report_frame,
    edge_distance,
    conditional_link_probability_bound,
)

__all__ = [
    "Network",
    "load_network",
    "to_jsonable",
    "SCHEMES",
    "edge_count_for_density",
    "top_edges",
    "threshold_by_density",
    "threshold_by_value",
    "knn_graph",
    "zscore_network",
    "quantile_network",
    "build_network",
    "MEASURES",
    "MeasureReport",
    "degrees",
    "clustering",
    "betweenness",
    "shortest_path_lengths",
    "edge_lengths",
    "link_length_histogram",
    "link_length_summary",
    "forman_curvature",
    "mad_ball",
    "measure_report",
    "BUNDLE_KINDS",
    "LINK_FILTERS",
    "BundleSpec",
    "BundleScan",
    "neighborhood_weight",
    "is_bundle",
    "bundle_matrices",
    "bundle_scan",
    "bundle_report_frame",
    "edge_distance",
    "conditional_link_probability_bound",
]
