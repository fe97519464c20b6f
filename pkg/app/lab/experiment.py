"""
Experiment Runner - Config KEY=VALUE -> repetisi paralel -> report

Setiap repetisi: simulasi (atau resample data) -> estimasi -> konstruksi ->
measure / perbandingan dengan ground truth. Report adalah fungsi dari
config dan versi kode saja; timestamp hanya disimpan di run registry.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union
import hashlib
import json
import logging
import math

import networkx
import numpy as np
import pandas as pd
import scipy
import sklearn
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from sqlalchemy.exc import SQLAlchemyError
from tqdm import tqdm

from app import __version__
from app.config import BUNDLE_CONFIG, FIELD_CONFIG, LAB_CONFIG, OUTPUT_DIR, THREADS
from app.evaluation.comparison import (
    differing_fraction,
    false_discovery_rate,
    frobenius_error,
    ground_truth_network,
    missing_edge_rate,
)
from app.evaluation.summaries import degree_bias_report
from app.exceptions import ConfigError, UndefinedResultError
from app.field.autocorr import anisotropic_autocorr
from app.field.covariance import MaternParams, ground_truth_covariance
from app.field.dataset import Dataset
from app.field.simulation import FieldSpec, NoiseSpec, simulate
from app.grid.fekete import fekete_grid
from app.grid.sphere_grid import SphereGrid, gaussian_grid, hemisphere_mask
from app.ingest.anomalies import anomalies
from app.ingest.loader import load_gridded
from app.lab.construction import ConstructionSpec
from app.network.builder import SCHEMES
from app.network.bundles import BUNDLE_KINDS, BundleSpec, bundle_scan
from app.network.graph import Network, to_jsonable
from app.network.measures import MEASURES, measure_report
from app.seeds import derive_seed
from app.similarity.base import CORRELATION_ESTIMATORS, SimilarityMatrix
from app.similarity.correlation import ground_truth_similarity
from app.similarity.estimate import ESTIMATOR_FUNCTIONS
from app.surrogates.baseline import edge_baseline
from app.surrogates.resampling import block_bootstrap_indices, resample_dataset, subsample_windows

logger = logging.getLogger(__name__)


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridConfig(_Section):
    kind: Literal["fekete", "gaussian", "file"] = "fekete"
    points: int = Field(default=1483, ge=2)
    iterations: Optional[int] = Field(default=None, ge=0)
    resolution: float = Field(default=5.0, gt=0)
    path: Optional[str] = None
    seed: int = 0

    @model_validator(mode="after")
    def _path_for_file(self):
        if self.kind == "file" and not self.path:
            raise ValueError("kind=file needs a path")
        return self

    def build(self) -> SphereGrid:
        if self.kind == "fekete":
            return fekete_grid(self.points, self.iterations, self.seed)
        if self.kind == "gaussian":
            return gaussian_grid(self.resolution)
        return SphereGrid.from_csv(self.path)


class SimulationConfig(_Section):
    nu: float = Field(default=0.5, gt=0)
    ell: float = Field(default=0.1, gt=0)
    variance: float = Field(default=1.0, gt=0)
    marginal: Literal["gaussian", "lognormal"] = "gaussian"
    lognormal_sigma2: float = Field(default=FIELD_CONFIG["lognormal_sigma2"], gt=0)
    autocorr: float = Field(default=0.0, gt=-1, lt=1)
    autocorr_low: Optional[float] = Field(default=None, gt=-1, lt=1)
    autocorr_high: Optional[float] = Field(default=None, gt=-1, lt=1)
    noise_amplitude: float = Field(default=0.0, ge=0)
    noise_region: Literal["all", "north", "south"] = "all"

    @model_validator(mode="after")
    def _anisotropic_pair(self):
        if (self.autocorr_low is None) != (self.autocorr_high is None):
            raise ValueError("autocorr_low and autocorr_high must be given together")
        return self

    @property
    def params(self) -> MaternParams:
        return MaternParams(nu=self.nu, ell=self.ell, variance=self.variance)

    @property
    def anisotropic(self) -> bool:
        return self.autocorr_low is not None

    def autocorr_vector(self, p: int, seed: int) -> np.ndarray:
        if self.anisotropic:
            return anisotropic_autocorr(p, self.autocorr_low, self.autocorr_high, seed)
        return np.full(p, self.autocorr)

    def field_spec(self, grid: SphereGrid, autocorr: np.ndarray) -> FieldSpec:
        noise = None
        if self.noise_amplitude > 0:
            if self.noise_region == "all":
                mask = np.ones(grid.size, dtype=bool)
            else:
                mask = hemisphere_mask(grid, north=self.noise_region == "north")
            noise = NoiseSpec(mask=mask, amplitude=self.noise_amplitude)
        return FieldSpec(matern=self.params, autocorr=autocorr, marginal=self.marginal,
                         lognormal_sigma2=self.lognormal_sigma2, noise=noise)


class DataConfig(_Section):
    grid_file: str
    data_file: str
    timestamps_file: Optional[str] = None
    resample: Literal["none", "block_bootstrap", "subsample"] = "block_bootstrap"
    block_len: Optional[int] = Field(default=None, ge=1)
    window: Optional[int] = Field(default=None, ge=1)
    stride: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _window_for_subsample(self):
        if self.resample == "subsample" and self.window is None:
            raise ValueError("resample=subsample needs a window")
        return self


class SweepConfig(_Section):
    estimators: List[str] = Field(default_factory=lambda: ["pearson_empirical"])
    scheme: str = "density"
    densities: List[float] = Field(default_factory=lambda: [0.005])
    taus: List[float] = Field(default_factory=lambda: [0.5])
    k: List[int] = Field(default_factory=lambda: [5])
    levels: List[float] = Field(default_factory=lambda: [0.95])
    weighted: bool = False
    baseline_method: Literal["shuffle", "iaaft"] = "shuffle"
    baseline_m: int = Field(default=100, ge=2)

    @field_validator("estimators", "densities", "taus", "k", "levels", mode="before")
    @classmethod
    def _comma_lists(cls, value):
        return _split_list(value)

    @field_validator("estimators")
    @classmethod
    def _known_estimators(cls, value: List[str]) -> List[str]:
        unknown = [tag for tag in value if tag not in ESTIMATOR_FUNCTIONS]
        if unknown or not value:
            raise ValueError(f"unknown estimators {unknown}, expected a subset of {sorted(ESTIMATOR_FUNCTIONS)}")
        return value

    @field_validator("scheme")
    @classmethod
    def _known_scheme(cls, value: str) -> str:
        if value not in SCHEMES:
            raise ValueError(f"unknown scheme '{value}', expected one of {SCHEMES}")
        return value

    def parameter_values(self) -> Tuple[str, List[float]]:
        return {
            "density": ("density", self.densities),
            "threshold": ("tau", self.taus),
            "knn": ("k", self.k),
            "zscore": ("density", self.densities),
            "quantile": ("level", self.levels),
        }[self.scheme]

    def constructions(self) -> List[ConstructionSpec]:
        name, values = self.parameter_values()
        return [
            ConstructionSpec(estimator=estimator, scheme=self.scheme, params={name: value},
                             weighted=self.weighted, baseline_method=self.baseline_method,
                             baseline_m=self.baseline_m)
            for estimator in self.estimators
            for value in values
        ]


class BundleConfig(_Section):
    kinds: List[str] = Field(default_factory=list)
    eps_deg: float = Field(default=math.degrees(BUNDLE_CONFIG["eps"]), gt=0)
    c: float = Field(default=BUNDLE_CONFIG["c"], gt=0, le=1)

    @field_validator("kinds", mode="before")
    @classmethod
    def _comma_lists(cls, value):
        return _split_list(value)

    @field_validator("kinds")
    @classmethod
    def _known_kinds(cls, value: List[str]) -> List[str]:
        unknown = [kind for kind in value if kind not in BUNDLE_KINDS]
        if unknown:
            raise ValueError(f"unknown bundle kinds {unknown}, expected a subset of {BUNDLE_KINDS}")
        return value

    def specs(self) -> List[BundleSpec]:
        return [BundleSpec(eps=math.radians(self.eps_deg), c=self.c, kind=kind) for kind in self.kinds]


class ExperimentConfig(_Section):
    """
    Deklarasi eksperimen

    Sumber data adalah `simulation` (default) atau `data` (file gridded yang
    dijadikan anomali lalu di-resample per repetisi).
    """

    name: str = "experiment"
    seed: int = 0
    repetitions: int = Field(default=LAB_CONFIG["repetitions"], ge=1)
    n: int = Field(default=100, ge=2)
    threads: Optional[int] = Field(default=None, ge=1)
    output: Optional[str] = None
    grid: GridConfig = Field(default_factory=GridConfig)
    simulation: Optional[SimulationConfig] = None
    data: Optional[DataConfig] = None
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    measures: List[str] = Field(default_factory=list)
    mad_eps_deg: float = Field(default=math.degrees(LAB_CONFIG["mad_eps"]), gt=0)
    bundles: BundleConfig = Field(default_factory=BundleConfig)
    compare: bool = True
    save_networks: bool = False

    @field_validator("measures", mode="before")
    @classmethod
    def _comma_lists(cls, value):
        return _split_list(value)

    @field_validator("measures")
    @classmethod
    def _known_measures(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in MEASURES]
        if unknown:
            raise ValueError(f"unknown measures {unknown}, expected a subset of {MEASURES}")
        return value

    @model_validator(mode="after")
    def _one_source(self):
        if self.simulation is not None and self.data is not None:
            raise ValueError("give either simulation.* or data.*, not both")
        return self

    @property
    def simulated(self) -> bool:
        return self.data is None

    @property
    def source(self) -> SimulationConfig:
        return self.simulation or SimulationConfig()


def fold_dotted(flat: Dict[str, Optional[str]]) -> Dict:
    """{"a.b": v} -> {"a": {"b": v}}"""
    nested: Dict = {}
    for key, value in flat.items():
        if value is None:
            raise ConfigError("missing value", path=key)
        parts = key.strip().split(".")
        node = nested
        for depth, part in enumerate(parts[:-1]):
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError("key is both a value and a section", path=".".join(parts[: depth + 1]))
        if isinstance(node.get(parts[-1]), dict):
            raise ConfigError("key is both a value and a section", path=key)
        node[parts[-1]] = value
    return nested


def _error_path(error: Dict) -> str:
    return ".".join(str(part) for part in error["loc"] if not isinstance(part, int)) or "<root>"


def parse_experiment_config(values: Dict) -> ExperimentConfig:
    """Validasi nested dict; error pertama dilaporkan dengan dotted path"""
    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(first["msg"], path=_error_path(first)) from e


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load config KEY=VALUE (syntax dotenv) dengan dotted keys

    Raises:
        ConfigError: File tidak ada atau key/value tidak valid
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found", path=str(path))
    flat = dotenv_values(path, interpolate=False)
    if not flat:
        logger.warning(f"Config {path} is empty, using defaults")
    return parse_experiment_config(fold_dotted(flat))


def config_hash(config: ExperimentConfig) -> str:
    payload = json.dumps(config.model_dump(mode="json"), sort_keys=True)
    return hashlib.sha256(f"{payload}|{__version__}".encode("utf-8")).hexdigest()


def aggregate_records(records: pd.DataFrame, band: Tuple[float, float] = None) -> Dict[str, Dict[str, Dict[str, float]]]:
    """
    Mean dan quantile band per construction label per metric

    Returns:
        {label: {metric: {"mean", "q<lo>", "q<hi>", "count"}}}
    """
    band = band or LAB_CONFIG["band"]
    aggregates: Dict = {}
    if records.empty:
        return aggregates
    metrics = [col for col in records.select_dtypes(include="number").columns if col not in ("rep", "parameter")]
    for label, group in records.groupby("label", sort=True):
        summary = {}
        for metric in metrics:
            values = group[metric].dropna().to_numpy(dtype=float)
            if values.size == 0:
                continue
            low, high = np.quantile(values, band)
            summary[metric] = {"mean": float(values.mean()), f"q{band[0]:g}": float(low),
                               f"q{band[1]:g}": float(high), "count": int(values.size)}
        aggregates[label] = summary
    return aggregates


@dataclass
class ExperimentReport:
    """Record per repetisi, agregat, dan provenance"""

    config: Dict
    provenance: Dict
    records: pd.DataFrame
    aggregates: Dict
    failures: List[Dict] = field(default_factory=list)
    truth: Dict = field(default_factory=dict)
    output_dir: Optional[Path] = None

    @property
    def status(self) -> str:
        completed = self.provenance["repetitions"] - len(self.failures)
        if not self.failures:
            return "completed"
        return "partial" if completed > 0 else "failed"

    def to_dict(self) -> Dict:
        return to_jsonable({
            "config": self.config,
            "provenance": self.provenance,
            "status": self.status,
            "aggregates": self.aggregates,
            "failures": self.failures,
            "truth": self.truth,
        })

    def write(self, directory: Union[str, Path]) -> Path:
        """Tulis report.json dan per_rep/records.csv"""
        directory = Path(directory)
        (directory / "per_rep").mkdir(parents=True, exist_ok=True)
        self.records.to_csv(directory / "per_rep" / "records.csv", index=False, float_format="%.17g")
        path = directory / "report.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        self.output_dir = directory
        return path


@dataclass
class _Context:
    config: ExperimentConfig
    grid: SphereGrid
    constructions: List[ConstructionSpec]
    bundle_specs: List[BundleSpec]
    output_dir: Path
    spec: Optional[FieldSpec] = None
    covariance: object = None
    dataset: Optional[Dataset] = None
    autocorr: Optional[np.ndarray] = None
    truth_sim: Optional[SimilarityMatrix] = None
    truth_networks: Dict[str, Network] = field(default_factory=dict)

    def dataset_for(self, r: int) -> Dataset:
        config = self.config
        if config.simulated:
            return simulate(self.grid, self.spec, config.n, derive_seed(config.seed, r, "simulate"),
                            covariance=self.covariance)

        data = self.dataset
        if config.data.resample == "none":
            return data
        if config.data.resample == "block_bootstrap":
            indices = block_bootstrap_indices(data.n, config.data.block_len,
                                              derive_seed(config.seed, r, "resample"))
        else:
            windows = subsample_windows(data.n, config.data.window, config.data.stride)
            indices = windows[r % len(windows)]
        return resample_dataset(data, indices)


def _prepare(config: ExperimentConfig, output_dir: Path) -> _Context:
    context = _Context(
        config=config,
        grid=None,
        constructions=config.sweep.constructions(),
        bundle_specs=config.bundles.specs(),
        output_dir=output_dir,
    )
    if config.simulated:
        context.grid = config.grid.build()
        source = config.source
        context.autocorr = source.autocorr_vector(context.grid.size, derive_seed(config.seed, 0, "autocorr"))
        context.spec = source.field_spec(context.grid, context.autocorr)
        context.covariance = ground_truth_covariance(context.grid, source.params)
        if config.compare:
            context.truth_sim = ground_truth_similarity(context.grid, source.params, source.marginal,
                                                        source.lognormal_sigma2)
            for spec in context.constructions:
                context.truth_networks[spec.label] = ground_truth_network(
                    context.grid, source.params, spec.scheme, spec.weighted, truth=context.truth_sim,
                    n=config.n, autocorr=context.autocorr, **spec.params,
                )
    else:
        raw = load_gridded(config.data.grid_file, config.data.data_file, config.data.timestamps_file)
        context.dataset = anomalies(raw)
        context.grid = context.dataset.grid
        logger.info(f"Loaded {context.dataset.p}x{context.dataset.n} anomalies, grid settings ignored")
    logger.info(f"Experiment '{config.name}': {len(context.constructions)} constructions on {context.grid.size} nodes")
    return context


def _truth_summary(context: _Context) -> Dict:
    summary = {}
    for label, net in context.truth_networks.items():
        entry = {"n_edges": net.n_edges, "density": net.density}
        if context.config.measures:
            report = measure_report(net, context.grid, context.config.measures,
                                    eps=math.radians(context.config.mad_eps_deg),
                                    seed=derive_seed(context.config.seed, 0, "truth:mad"))
            entry.update(report.scalars)
        summary[label] = entry
    return summary


def _baselines(context: _Context, data: Dataset, seed: int) -> Dict[str, object]:
    sweep = context.config.sweep
    if sweep.scheme not in ("zscore", "quantile"):
        return {}
    levels = sweep.levels if sweep.scheme == "quantile" else None
    return {
        estimator: edge_baseline(data, estimator, sweep.baseline_method, sweep.baseline_m, levels=levels,
                                 seed=derive_seed(seed, 0, f"baseline:{sweep.baseline_method}"), threads=1)
        for estimator in sweep.estimators
    }


def _run_repetition(context: _Context, r: int) -> List[Dict]:
    config = context.config
    seed = derive_seed(config.seed, r, "repetition")
    data = context.dataset_for(r)
    baselines = _baselines(context, data, seed)
    sims: Dict[str, SimilarityMatrix] = {}
    records = []

    for spec in context.constructions:
        if spec.estimator not in sims:
            sims[spec.estimator] = spec.estimate(data, seed)
        sim, net = spec.build(data, seed, sim=sims[spec.estimator], baseline=baselines.get(spec.estimator))
        _, value = spec.parameter
        record = {"rep": r, "label": spec.label, "estimator": spec.estimator, "scheme": spec.scheme,
                  "parameter": value, "n_edges": net.n_edges, "density": net.density}

        if config.measures:
            report = measure_report(net, context.grid, config.measures, eps=math.radians(config.mad_eps_deg),
                                    seed=derive_seed(config.seed, r, "mad"))
            record.update(report.scalars)

        truth = context.truth_networks.get(spec.label)
        if truth is not None:
            record["fdr"] = false_discovery_rate(net, truth)
            record["missing_edge_rate"] = missing_edge_rate(net, truth)
            try:
                record["differing_fraction"] = differing_fraction(net, truth)
            except UndefinedResultError:
                record["differing_fraction"] = None
            if spec.estimator in CORRELATION_ESTIMATORS:
                record["frobenius_rms"] = frobenius_error(sim, context.truth_sim, per_edge_rms=True)

        if config.simulated and config.source.anisotropic:
            source = config.source
            bias = degree_bias_report(net, context.autocorr, expected_groups=[source.autocorr_low, source.autocorr_high])
            low = bias.group_means.get(str(source.autocorr_low))
            high = bias.group_means.get(str(source.autocorr_high))
            record["degree_low_autocorr"] = low
            record["degree_high_autocorr"] = high
            if low is not None and high is not None:
                record["degree_gap"] = high - low

        for bundle in context.bundle_specs:
            scan = bundle_scan(net, context.grid, bundle)
            record[f"bundle_{bundle.kind}_max_length"] = scan.max_bundle_length
            record[f"bundle_{bundle.kind}_fraction"] = scan.fraction_in_bundles
            if truth is not None:
                false_scan = bundle_scan(net, context.grid, bundle, link_filter="false_links", reference=truth)
                record[f"bundle_{bundle.kind}_false_fraction"] = false_scan.fraction_in_bundles

        if config.save_networks:
            net.to_csv(context.output_dir / "networks" / f"rep{r}_{spec.label}.csv")
        records.append(record)
    return records


def _register(config: ExperimentConfig, digest: str) -> Optional[int]:
    from app.database import register_run

    try:
        return register_run(config.name, digest, config.seed, config.repetitions)
    except SQLAlchemyError as e:
        logger.warning(f"Run registry unavailable: {e}")
        return None


def _finish(run_id: Optional[int], statuses: List[Dict], status: str, report_path: Path):
    from app.database import finish_run

    if run_id is None:
        return
    try:
        finish_run(run_id, statuses, status, str(report_path))
    except SQLAlchemyError as e:
        logger.warning(f"Could not update run registry: {e}")


def run_experiment(
    config: ExperimentConfig,
    output_dir: Optional[Union[str, Path]] = None,
    threads: Optional[int] = None,
    registry: bool = True,
) -> ExperimentReport:
    """
    Jalankan semua repetisi dan tulis report

    Repetisi yang gagal dicatat tanpa menghentikan sweep.

    Args:
        config: ExperimentConfig
        output_dir: Direktori output (default config.output atau OUTPUT_DIR/<name>)
        threads: Worker thread (default config.threads atau LAB_THREADS)
        registry: Catat run di database registry

    Returns:
        ExperimentReport
    """
    output_dir = Path(output_dir or config.output or OUTPUT_DIR / config.name)
    threads = threads or config.threads or THREADS
    digest = config_hash(config)
    run_id = _register(config, digest) if registry else None

    context = _prepare(config, output_dir)
    seeds = [derive_seed(config.seed, r, "repetition") for r in range(config.repetitions)]

    def attempt(r: int):
        try:
            return _run_repetition(context, r), None
        except Exception as e:
            logger.error(f"Repetition {r} failed: {e}")
            return [], f"{type(e).__name__}: {e}"

    with ThreadPoolExecutor(max_workers=threads) as pool:
        outcomes = list(tqdm(pool.map(attempt, range(config.repetitions)), total=config.repetitions,
                             desc=config.name, disable=None))

    rows, statuses, failures = [], [], []
    for r, (records, error) in enumerate(outcomes):
        rows.extend(records)
        statuses.append({"index": r, "seed": seeds[r], "status": "failed" if error else "ok", "error": error})
        if error:
            failures.append({"rep": r, "seed": str(seeds[r]), "error": error})

    records = pd.DataFrame(rows)
    report = ExperimentReport(
        config=config.model_dump(mode="json"),
        provenance={
            "config_hash": digest,
            "version": __version__,
            "seed": config.seed,
            "repetitions": config.repetitions,
            "repetition_seeds": [str(seed) for seed in seeds],
            "packages": {"numpy": np.__version__, "pandas": pd.__version__, "scipy": scipy.__version__,
                         "networkx": networkx.__version__, "scikit-learn": sklearn.__version__},
        },
        records=records,
        aggregates=aggregate_records(records),
        failures=failures,
        truth=_truth_summary(context),
    )
    path = report.write(output_dir)
    _finish(run_id, statuses, report.status, path)
    logger.info(f"Experiment '{config.name}' {report.status}: report at {path}")
    return report
