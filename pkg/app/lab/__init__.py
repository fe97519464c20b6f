"""
Lab Module - Experiment runner, ensemble pipeline, quantile calibration
"""

from app.lab.construction import SCHEME_PARAMETER, ConstructionSpec
from app.lab.ensemble import ENSEMBLE_SCHEMES, EnsembleResult, ensemble_pipeline
from app.lab.calibration import quantile_calibration
from app.lab.experiment import (
    ExperimentConfig,
    ExperimentReport,
    aggregate_records,
    config_hash,
    fold_dotted,
    load_experiment_config,
    parse_experiment_config,
    run_experiment,
)

__all__ = [
    "SCHEME_PARAMETER",
    "ConstructionSpec",
    "ENSEMBLE_SCHEMES",
    "EnsembleResult",
    "ensemble_pipeline",
    "quantile_calibration",
    "ExperimentConfig",
    "ExperimentReport",
    "aggregate_records",
    "config_hash",
    "fold_dotted",
    "load_experiment_config",
    "parse_experiment_config",
    "run_experiment",
]
