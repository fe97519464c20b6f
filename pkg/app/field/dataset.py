"""
Dataset - Matriks p x n anomali yang terikat pada grid
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Union
import logging

import numpy as np
import pandas as pd

from app.exceptions import FormatError, InvalidArgumentError
from app.grid.sphere_grid import SphereGrid

logger = logging.getLogger(__name__)


@dataclass
class Dataset:
    """
    Spatio-temporal data X_it

    Attributes:
        values: Matriks (p, n), finite
        grid: Grid dengan p node
        calendar: DataFrame opsional dengan kolom year, month[, day]
        flagged: Boolean per node; node yang di-flag diisolasi di network
        metadata: Provenance (seed, repair info, preprocessing)
    """

    values: np.ndarray
    grid: SphereGrid
    calendar: Optional[pd.DataFrame] = None
    flagged: Optional[np.ndarray] = None
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise InvalidArgumentError(f"values must be 2-dimensional, got shape {self.values.shape}")
        if self.values.shape[0] != self.grid.size:
            raise InvalidArgumentError(
                f"values have {self.values.shape[0]} rows but grid has {self.grid.size} nodes"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgumentError("Dataset values must be finite")
        if self.calendar is not None and len(self.calendar) != self.n:
            raise InvalidArgumentError("calendar length does not match time length")
        if self.flagged is None:
            self.flagged = np.zeros(self.p, dtype=bool)
        else:
            self.flagged = np.asarray(self.flagged, dtype=bool)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: np.ndarray, **metadata) -> "Dataset":
        """Copy dengan values baru (calendar dan flags dipertahankan)"""
        return replace(self, values=values, metadata={**self.metadata, **metadata})

    def to_frame(self) -> pd.DataFrame:
        """Frame dengan header node_index,lat_deg,lon_deg,t0,...,t{n-1}"""
        frame = pd.DataFrame(self.values, columns=[f"t{t}" for t in range(self.n)])
        frame.insert(0, "lon_deg", self.grid.lon_deg)
        frame.insert(0, "lat_deg", self.grid.lat_deg)
        frame.insert(0, "node_index", np.arange(self.p))
        return frame

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "Dataset":
        """Load Dataset dari CSV (grid dibangun dari kolom lat/lon)"""
        try:
            frame = pd.read_csv(path, float_precision="round_trip")
        except (OSError, pd.errors.ParserError) as e:
            raise FormatError(f"Cannot read dataset file {path}: {e}") from e

        if list(frame.columns[:3]) != ["node_index", "lat_deg", "lon_deg"]:
            raise FormatError(f"Dataset file {path} must start with node_index,lat_deg,lon_deg")
        time_cols = list(frame.columns[3:])
        if time_cols != [f"t{t}" for t in range(len(time_cols))]:
            raise FormatError(f"Dataset file {path} has malformed time columns")

        frame = frame.sort_values("node_index", kind="stable")
        grid = SphereGrid.from_latlon(frame["lat_deg"].to_numpy(), frame["lon_deg"].to_numpy())
        values = frame[time_cols].to_numpy(dtype=float)
        if not np.all(np.isfinite(values)):
            raise FormatError(f"Dataset file {path} contains missing values; use `lab ingest` first")
        return cls(values=values, grid=grid, metadata={"source": str(path)})
