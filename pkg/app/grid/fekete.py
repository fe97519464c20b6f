"""
Fekete Grid - Titik hampir isotropik lewat minimisasi logarithmic energy
"""

import logging

import numpy as np
from scipy.spatial.transform import Rotation
from tqdm import tqdm

from app.config import GRID_CONFIG
from app.exceptions import InvalidArgumentError
from app.grid.sphere_grid import SphereGrid

logger = logging.getLogger(__name__)


def fibonacci_points(n_points: int) -> np.ndarray:
    """Spherical Fibonacci lattice (golden spiral), shape (n, 3)"""
    i = np.arange(n_points, dtype=np.float64)
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    angle = 2.0 * np.pi * (1.0 - 1.0 / golden)

    z = 1.0 - 2.0 * (i + 0.5) / n_points
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    pts = np.stack([r * np.cos(angle * i), r * np.sin(angle * i), z], axis=1)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _seeded_start(n_points: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rotation = Rotation.random(None, rng)
    pts = rotation.apply(fibonacci_points(n_points))

    spacing = np.sqrt(4.0 * np.pi / n_points)
    pts = pts + rng.normal(scale=GRID_CONFIG["fekete_jitter"] * spacing, size=pts.shape)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _repulsion(pts: np.ndarray, chunk: int):
    """Tangential log-energy force and nearest-neighbour chord per point"""
    n = pts.shape[0]
    force = np.empty_like(pts)
    nearest = np.empty(n)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        diff = pts[start:stop, None, :] - pts[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        r2[np.arange(stop - start), np.arange(start, stop)] = np.inf
        force[start:stop] = np.einsum("ijk,ij->ik", diff, 1.0 / r2)
        nearest[start:stop] = np.sqrt(r2.min(axis=1))

    # project ke tangent plane
    force -= np.sum(force * pts, axis=1, keepdims=True) * pts
    return force, nearest


def log_energy(pts: np.ndarray, chunk: int = 512) -> float:
    """Logarithmic energy sum_{i<j} -log |x_i - x_j|"""
    n = pts.shape[0]
    total = 0.0
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        diff = pts[start:stop, None, :] - pts[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        r2[np.arange(stop - start), np.arange(start, stop)] = 1.0
        total += -0.5 * np.log(r2).sum()
    return float(total / 2.0)


def fekete_grid(n_points: int, iterations: int = None, seed: int = 0) -> SphereGrid:
    """
    Generate Fekete grid dengan projected gradient descent

    Start adalah Fibonacci lattice yang dirotasi dan di-jitter berdasarkan seed;
    setiap iterasi adalah satu langkah descent pada logarithmic energy.

    Args:
        n_points: Jumlah titik (>= 2)
        iterations: Jumlah langkah descent (default dari GRID_CONFIG)
        seed: Seed untuk start acak

    Returns:
        SphereGrid dengan kind "fekete"
    """
    if n_points < 2:
        raise InvalidArgumentError(f"fekete_grid needs n_points >= 2, got {n_points}")
    if iterations is None:
        iterations = GRID_CONFIG["fekete_iterations"]
    if iterations < 0:
        raise InvalidArgumentError(f"iterations must be non-negative, got {iterations}")

    chunk = GRID_CONFIG["fekete_chunk"]
    step = GRID_CONFIG["fekete_step"] * 4.0 * np.pi / n_points
    pts = _seeded_start(n_points, seed)

    progress = tqdm(range(iterations), desc="Fekete descent", disable=None,
                    leave=False)
    for _ in progress:
        force, nearest = _repulsion(pts, chunk)
        move = step * force
        # displacement per titik dibatasi setengah jarak ke tetangga terdekat
        norm = np.linalg.norm(move, axis=1)
        cap = 0.5 * nearest
        scale = np.where(norm > cap, cap / np.maximum(norm, np.finfo(float).tiny), 1.0)
        pts = pts + move * scale[:, None]
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)

    grid = SphereGrid(pts, kind="fekete", resolution_hint=float(np.degrees(np.sqrt(4.0 * np.pi / n_points))))
    grid.metadata.update({"iterations": iterations, "seed": seed, "log_energy": log_energy(pts, chunk)})
    logger.info(f"Fekete grid built: {n_points} points, {iterations} iterations, seed {seed}")
    return grid
