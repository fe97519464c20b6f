"""
Sphere Grid - Titik-titik grid pada unit sphere dan query jarak
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Set, Union
import logging

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from app.config import GRID_CONFIG
from app.exceptions import FormatError, GridError, InvalidArgumentError

logger = logging.getLogger(__name__)

GRID_KINDS = ("fekete", "gaussian", "custom")


def latlon_to_xyz(lat_deg: np.ndarray, lon_deg: np.ndarray) -> np.ndarray:
    """Convert latitude/longitude (degrees) ke unit 3-vectors"""
    lat = np.radians(np.asarray(lat_deg, dtype=float))
    lon = np.radians(np.asarray(lon_deg, dtype=float))
    cos_lat = np.cos(lat)
    return np.stack([cos_lat * np.cos(lon), cos_lat * np.sin(lon), np.sin(lat)], axis=-1)


def xyz_to_latlon(xyz: np.ndarray):
    """Convert unit 3-vectors ke (lat_deg, lon_deg), lon in [0, 360)"""
    xyz = np.asarray(xyz, dtype=float)
    lat = np.degrees(np.arctan2(xyz[:, 2], np.hypot(xyz[:, 0], xyz[:, 1])))
    lon = np.degrees(np.arctan2(xyz[:, 1], xyz[:, 0])) % 360.0
    return lat, lon


@dataclass(frozen=True)
class SphereGrid:
    """
    Ordered point set pada unit sphere

    Node index i is the identity of node v_i; the order never changes after
    construction.
    """

    points: np.ndarray
    kind: str = "custom"
    resolution_hint: Optional[float] = None
    metadata: Dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        points = np.array(self.points, dtype=float, copy=True)
        if points.ndim != 2 or points.shape[1] != 3:
            raise InvalidArgumentError(f"points must have shape (p, 3), got {points.shape}")
        if self.kind not in GRID_KINDS:
            raise InvalidArgumentError(f"Unknown grid kind '{self.kind}'")
        norms = np.linalg.norm(points, axis=1)
        if np.any(np.abs(norms - 1.0) > GRID_CONFIG["unit_tolerance"]):
            raise InvalidArgumentError("All grid points must have unit norm")
        points /= norms[:, None]
        pairs = cKDTree(points).query_pairs(r=GRID_CONFIG["min_separation"], output_type="ndarray")
        if len(pairs):
            i, j = pairs[0]
            raise GridError(f"Grid points {i} and {j} coincide ({len(pairs)} coinciding pairs)")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_latlon(cls, lat_deg, lon_deg, kind: str = "custom",
                    resolution_hint: Optional[float] = None) -> "SphereGrid":
        """Bangun grid dari latitude/longitude dalam derajat"""
        return cls(latlon_to_xyz(lat_deg, lon_deg), kind=kind, resolution_hint=resolution_hint)

    @property
    def xyz(self) -> np.ndarray:
        return self.points

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.size

    @property
    def lat_deg(self) -> np.ndarray:
        return xyz_to_latlon(self.points)[0]

    @property
    def lon_deg(self) -> np.ndarray:
        return xyz_to_latlon(self.points)[1]

    def to_frame(self) -> pd.DataFrame:
        """Grid sebagai DataFrame dengan kolom index, lat_deg, lon_deg"""
        lat, lon = xyz_to_latlon(self.points)
        return pd.DataFrame({"index": np.arange(self.size), "lat_deg": lat, "lon_deg": lon})

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Simpan grid ke CSV (`index,lat_deg,lon_deg`)"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path], kind: str = "custom") -> "SphereGrid":
        """
        Load grid dari CSV

        Args:
            path: File dengan kolom index, lat_deg, lon_deg
            kind: Grid kind recorded on the result

        Returns:
            SphereGrid in the file's index order
        """
        try:
            df = pd.read_csv(path, float_precision="round_trip")
        except (OSError, pd.errors.ParserError) as e:
            raise FormatError(f"Cannot read grid file {path}: {e}") from e

        missing = {"index", "lat_deg", "lon_deg"} - set(df.columns)
        if missing:
            raise FormatError(f"Grid file {path} is missing columns {sorted(missing)}")
        df = df.sort_values("index", kind="stable")
        if not np.array_equal(df["index"].to_numpy(), np.arange(len(df))):
            raise FormatError(f"Grid file {path} must index nodes 0..p-1")
        return cls.from_latlon(df["lat_deg"].to_numpy(), df["lon_deg"].to_numpy(), kind=kind)


def _check_unit(v: np.ndarray, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > GRID_CONFIG["unit_tolerance"]:
        raise InvalidArgumentError(f"{name} must be a unit 3-vector")
    return v


def great_circle_angle(u, v) -> float:
    """
    Sudut great-circle antara dua unit vector

    Uses atan2(|u x v|, u . v), which stays accurate for nearly equal and
    nearly antipodal inputs.

    Returns:
        Angle in radians, in [0, pi]
    """
    u = _check_unit(u, "u")
    v = _check_unit(v, "v")
    if np.array_equal(u, v):
        return 0.0
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v)))


def chordal_distance_matrix(grid: SphereGrid, chunk: int = 1024) -> np.ndarray:
    """Jarak Euclidean (chordal) antar semua titik grid"""
    pts = grid.points
    p = pts.shape[0]
    out = np.empty((p, p))
    for start in range(0, p, chunk):
        block = pts[start:start + chunk]
        diff = block[:, None, :] - pts[None, :, :]
        out[start:start + chunk] = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(out, 0.0)
    return np.minimum(out, out.T)


def distance_matrix(grid: SphereGrid) -> np.ndarray:
    """
    Matriks sudut great-circle antar semua titik grid

    Returns:
        Symmetric p x p matrix, zero diagonal, entries in [0, pi]
    """
    cached = grid.metadata.get("_distance_matrix")
    if cached is not None:
        return cached
    chord = chordal_distance_matrix(grid)
    angles = 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
    angles.setflags(write=False)
    grid.metadata["_distance_matrix"] = angles
    return angles


def epsilon_ball(grid: SphereGrid, i: int, eps: float) -> Set[int]:
    """
    Node dalam radius eps dari node i

    Args:
        grid: Sphere grid
        i: Node index
        eps: Radius dalam radian, 0 <= eps <= pi

    Returns:
        Set of node indices j with d(v_i, v_j) <= eps (always contains i)
    """
    if not 0 <= int(i) < grid.size:
        raise InvalidArgumentError(f"Node index {i} out of range for grid of size {grid.size}")
    if not 0.0 <= eps <= np.pi:
        raise InvalidArgumentError(f"eps must lie in [0, pi], got {eps}")
    row = distance_matrix(grid)[int(i)]
    return set(np.flatnonzero(row <= eps).tolist())


def ball_membership(grid: SphereGrid, eps: float) -> np.ndarray:
    """Boolean matrix B with B[i, k] = (v_k in B_eps(v_i))"""
    if eps < 0:
        raise InvalidArgumentError(f"eps must be non-negative, got {eps}")
    return distance_matrix(grid) <= eps


def nearest_neighbor_angles(grid: SphereGrid) -> np.ndarray:
    """Sudut ke tetangga terdekat untuk setiap node"""
    dist = np.array(distance_matrix(grid), copy=True)
    np.fill_diagonal(dist, np.inf)
    return dist.min(axis=1)


def isotropy_summary(grid: SphereGrid) -> Dict[str, float]:
    """Ringkasan isotropi: mean, coefficient of variation, max/min ratio"""
    nn = nearest_neighbor_angles(grid)
    return {
        "mean_nn_deg": float(np.degrees(nn.mean())),
        "cv_nn": float(nn.std() / nn.mean()),
        "max_min_ratio": float(nn.max() / nn.min()),
    }


def gaussian_grid(resolution_deg: float) -> SphereGrid:
    """
    Regular Gaussian grid

    Latitudes are offset by resolution/2 from the poles; every latitude
    carries the same number of longitudes.

    Args:
        resolution_deg: Jarak antar lat/lon dalam derajat, 0 < res <= 90

    Returns:
        SphereGrid of (360/res) * (180/res) points, latitude-major order
    """
    if not 0 < resolution_deg <= 90:
        raise InvalidArgumentError(f"resolution_deg must lie in (0, 90], got {resolution_deg}")

    n_lat = 180.0 / resolution_deg
    n_lon = 360.0 / resolution_deg
    if abs(n_lat - round(n_lat)) > 1e-9 or abs(n_lon - round(n_lon)) > 1e-9:
        raise InvalidArgumentError(f"resolution {resolution_deg} does not divide 180 and 360")
    n_lat, n_lon = int(round(n_lat)), int(round(n_lon))

    lats = -90.0 + resolution_deg / 2.0 + resolution_deg * np.arange(n_lat)
    lons = resolution_deg * np.arange(n_lon)
    lat_mesh, lon_mesh = np.meshgrid(lats, lons, indexing="ij")

    grid = SphereGrid.from_latlon(lat_mesh.ravel(), lon_mesh.ravel(), kind="gaussian",
                                  resolution_hint=float(resolution_deg))
    logger.info(f"Gaussian grid built: {grid.size} points at {resolution_deg} deg")
    return grid


def subset_grid(grid: SphereGrid, mask) -> SphereGrid:
    """
    Ambil subset grid berdasarkan mask boolean

    Args:
        grid: Source grid
        mask: Boolean per node, True = keep

    Returns:
        Custom grid keeping the original relative order
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (grid.size,):
        raise InvalidArgumentError(f"mask length {mask.shape} does not match grid size {grid.size}")
    if mask.sum() < 2:
        raise InvalidArgumentError("subset_grid needs at least 2 retained nodes")
    sub = SphereGrid(grid.points[mask], kind="custom", resolution_hint=grid.resolution_hint)
    sub.metadata["source_indices"] = np.flatnonzero(mask)
    return sub


def hemisphere_mask(grid: SphereGrid, north: bool = True) -> np.ndarray:
    """Mask node di belahan utara (atau selatan)"""
    lat = grid.lat_deg
    return lat > 0 if north else lat < 0
