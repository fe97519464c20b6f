"""
Field Simulation - Sampling MIGRF dengan VAR(1), transform log-normal, dan noise
"""

from dataclasses import dataclass, field
from typing import Optional
import logging

import numpy as np

from app.config import FIELD_CONFIG
from app.exceptions import InvalidArgumentError
from app.field.covariance import (
    CovarianceMatrix,
    MaternParams,
    ground_truth_covariance,
    innovation_covariance,
    sampling_factor,
    stationary_covariance,
)
from app.field.dataset import Dataset
from app.grid.sphere_grid import SphereGrid

logger = logging.getLogger(__name__)

MARGINALS = ("gaussian", "lognormal")


@dataclass
class NoiseSpec:
    """Additive i.i.d. noise amplitude * N(0,1) pada node yang di-mask"""

    mask: np.ndarray
    amplitude: float

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.amplitude < 0:
            raise InvalidArgumentError(f"noise amplitude must be non-negative, got {self.amplitude}")


@dataclass
class FieldSpec:
    """
    Model generatif lengkap

    Attributes:
        matern: Parameter Matern
        autocorr: Koefisien lag-1 per node (None = semua 0)
        marginal: "gaussian" atau "lognormal"
        lognormal_sigma2: sigma^2 untuk marginal log-normal
        noise: NoiseSpec opsional
    """

    matern: MaternParams
    autocorr: Optional[np.ndarray] = None
    marginal: str = "gaussian"
    lognormal_sigma2: float = FIELD_CONFIG["lognormal_sigma2"]
    noise: Optional[NoiseSpec] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.marginal not in MARGINALS:
            raise InvalidArgumentError(f"Unknown marginal '{self.marginal}', expected one of {MARGINALS}")
        if self.marginal == "lognormal" and self.lognormal_sigma2 <= 0:
            raise InvalidArgumentError("lognormal sigma2 must be positive")
        if self.autocorr is not None:
            self.autocorr = np.asarray(self.autocorr, dtype=float)
            if np.any(np.abs(self.autocorr) >= 1.0):
                raise InvalidArgumentError("autocorrelation coefficients must satisfy |a_i| < 1")

    def autocorr_for(self, p: int) -> np.ndarray:
        if self.autocorr is None:
            return np.zeros(p)
        return np.broadcast_to(self.autocorr, (p,)).astype(float)


def simulate(
    grid: SphereGrid,
    spec: FieldSpec,
    n: int,
    seed: int,
    covariance: Optional[CovarianceMatrix] = None,
) -> Dataset:
    """
    Simulasi dataset p x n dari FieldSpec

    Args:
        grid: Sphere grid
        spec: FieldSpec
        n: Panjang time series (>= 1)
        seed: RNG seed
        covariance: Ground-truth covariance yang sudah dihitung (opsional)

    Returns:
        Dataset dengan metadata sampling (factor method, innovation repair)
    """
    if n < 1:
        raise InvalidArgumentError(f"n must be >= 1, got {n}")
    if covariance is None:
        covariance = ground_truth_covariance(grid, spec.matern)
    if covariance.size != grid.size:
        raise InvalidArgumentError("covariance size does not match grid")

    p = grid.size
    a = spec.autocorr_for(p)
    rng = np.random.default_rng(seed)
    factor, method = sampling_factor(covariance.entries)
    metadata = {"seed": seed, "factor": method, "marginal": spec.marginal}

    if not np.any(a):
        values = factor @ rng.standard_normal((p, n))
    else:
        innovation = innovation_covariance(covariance, a)
        innovation_factor, _ = sampling_factor(innovation.entries)
        metadata["innovation"] = dict(innovation.metadata)
        if innovation.metadata["repaired"]:
            realized = stationary_covariance(innovation, a)
            bias = np.linalg.norm(realized - covariance.entries) / np.linalg.norm(covariance.entries)
            metadata["innovation"]["stationary_bias"] = float(bias)

        values = np.empty((p, n))
        values[:, 0] = factor @ rng.standard_normal(p)
        shocks = innovation_factor @ rng.standard_normal((p, n - 1)) if n > 1 else None
        for t in range(1, n):
            values[:, t] = a * values[:, t - 1] + shocks[:, t - 1]

    if spec.marginal == "lognormal":
        scale = np.sqrt(spec.lognormal_sigma2 / spec.matern.variance)
        values = np.exp(scale * values)
        metadata["lognormal_sigma2"] = spec.lognormal_sigma2

    if spec.noise is not None and spec.noise.amplitude > 0:
        if spec.noise.mask.shape != (p,):
            raise InvalidArgumentError("noise mask length does not match grid size")
        noise = rng.standard_normal((p, n))
        values = values + spec.noise.amplitude * noise * spec.noise.mask[:, None]
        metadata["noise_amplitude"] = spec.noise.amplitude

    logger.debug(f"Simulated {p}x{n} field, seed {seed}")
    return Dataset(values=values, grid=grid, metadata=metadata)
