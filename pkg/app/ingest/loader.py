"""
Gridded Loader - Baca/tulis data gridded yang sudah dikonversi ke CSV
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union
import logging

import numpy as np
import pandas as pd

from app.config import INGEST_CONFIG
from app.exceptions import FormatError
from app.grid.sphere_grid import SphereGrid

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class RawGriddedSeries:
    """
    Raw data p x n dengan NaN sebagai penanda missing

    Attributes:
        values: Matriks (p, n)
        grid: Grid dengan urutan node yang sama
        timestamps: DataFrame dengan kolom year, month[, day] atau None
    """

    values: np.ndarray
    grid: SphereGrid
    timestamps: Optional[pd.DataFrame] = None

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


def _read_csv(path: PathLike, **kwargs) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip", **kwargs)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FormatError(f"Cannot read {path}: {e}") from e


def _check_timestamps(timestamps: pd.DataFrame, n: int, path: PathLike) -> pd.DataFrame:
    missing = {"index", "year", "month"} - set(timestamps.columns)
    if missing:
        raise FormatError(f"Timestamp file {path} is missing columns {sorted(missing)}")
    timestamps = timestamps.sort_values("index", kind="stable").reset_index(drop=True)
    if len(timestamps) != n or not np.array_equal(timestamps["index"].to_numpy(), np.arange(n)):
        raise FormatError(f"Timestamp file {path} must index 0..{n - 1}")

    keys = ["year", "month"] + (["day"] if "day" in timestamps.columns else [])
    stamps = timestamps[keys]
    if stamps.isna().any().any():
        raise FormatError(f"Timestamp file {path} contains missing entries")
    if not ((stamps["month"] >= 1) & (stamps["month"] <= INGEST_CONFIG["months_per_year"])).all():
        raise FormatError(f"Timestamp file {path} has months outside 1..12")

    # urutan leksikografis (year, month, day) harus strictly increasing
    ordinal = pd.MultiIndex.from_frame(stamps.astype(int))
    if not (ordinal.is_monotonic_increasing and ordinal.is_unique):
        raise FormatError(f"Timestamps in {path} are not strictly increasing")
    return stamps.astype(int).reset_index(drop=True)


def load_gridded(
    grid_file: PathLike,
    data_file: PathLike,
    timestamps_file: Optional[PathLike] = None,
) -> RawGriddedSeries:
    """
    Load grid CSV + data CSV (+ timestamps sidecar)

    Args:
        grid_file: CSV `index,lat_deg,lon_deg`
        data_file: CSV `node_index,t0,...`; kosong atau `NaN` = missing
        timestamps_file: CSV `index,year,month[,day]` (opsional)

    Returns:
        RawGriddedSeries dengan urutan baris sesuai grid
    """
    grid = SphereGrid.from_csv(grid_file)
    frame = _read_csv(data_file, na_values=INGEST_CONFIG["missing_tokens"])

    if "node_index" not in frame.columns:
        raise FormatError(f"Data file {data_file} has no node_index column")
    time_cols = [c for c in frame.columns if c != "node_index"]
    if time_cols != [f"t{t}" for t in range(len(time_cols))] or not time_cols:
        raise FormatError(f"Data file {data_file} must have columns t0..t{{n-1}}")

    frame = frame.sort_values("node_index", kind="stable")
    if len(frame) != grid.size or not np.array_equal(frame["node_index"].to_numpy(), np.arange(grid.size)):
        raise FormatError(
            f"Data file {data_file} has {len(frame)} nodes, grid {grid_file} has {grid.size}"
        )
    try:
        values = frame[time_cols].to_numpy(dtype=float)
    except ValueError as e:
        raise FormatError(f"Data file {data_file} contains non-numeric values: {e}") from e
    if np.any(np.isinf(values)):
        raise FormatError(f"Data file {data_file} contains infinite values")

    timestamps = None
    if timestamps_file is not None:
        timestamps = _check_timestamps(_read_csv(timestamps_file), values.shape[1], timestamps_file)

    n_missing = int(np.isnan(values).sum())
    logger.info(f"Loaded {grid.size} nodes x {values.shape[1]} steps ({n_missing} missing cells)")
    return RawGriddedSeries(values=values, grid=grid, timestamps=timestamps)


def save_gridded(
    raw: RawGriddedSeries,
    grid_file: PathLike,
    data_file: PathLike,
    timestamps_file: Optional[PathLike] = None,
) -> None:
    """Tulis RawGriddedSeries dalam format yang dibaca load_gridded"""
    raw.grid.to_csv(grid_file)

    frame = pd.DataFrame(raw.values, columns=[f"t{t}" for t in range(raw.n)])
    frame.insert(0, "node_index", np.arange(raw.p))
    Path(data_file).parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(data_file, index=False, float_format="%.17g", na_rep="NaN")

    if timestamps_file is not None and raw.timestamps is not None:
        stamps = raw.timestamps.copy()
        stamps.insert(0, "index", np.arange(raw.n))
        stamps.to_csv(timestamps_file, index=False)
