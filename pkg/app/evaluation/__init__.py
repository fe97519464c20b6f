"""
Evaluation Module - Perbandingan network empiris terhadap ground truth
"""

from app.evaluation.comparison import (
    ComparisonReport,
    analytic_baseline,
    ground_truth_network,
    false_discovery_rate,
    missing_edge_rate,
    frobenius_error,
    differing_fraction,
    symmetric_differing_fraction,
    compare_networks,
)
from app.evaluation.summaries import (
    DegreeBiasReport,
    LocalCorrelationSummary,
    degree_bias_report,
    decorrelation_lengths,
    local_correlation_summary,
)

__all__ = [
    "ComparisonReport",
    "analytic_baseline",
    "ground_truth_network",
    "false_discovery_rate",
    "missing_edge_rate",
    "frobenius_error",
    "differing_fraction",
    "symmetric_differing_fraction",
    "compare_networks",
    "DegreeBiasReport",
    "LocalCorrelationSummary",
    "degree_bias_report",
    "decorrelation_lengths",
    "local_correlation_summary",
]
