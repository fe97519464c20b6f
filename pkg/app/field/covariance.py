"""
Covariance - Chordal Matern covariance dan turunannya
"""

from dataclasses import dataclass, field
from typing import Dict, Optional
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import gamma, kv
from sklearn.gaussian_process.kernels import Matern

from app.config import FIELD_CONFIG
from app.exceptions import InternalError, InvalidArgumentError
from app.grid.sphere_grid import SphereGrid

logger = logging.getLogger(__name__)


class MaternParams(BaseModel):
    """Parameter Matern: smoothness nu, length scale ell (chordal), variance"""

    model_config = ConfigDict(frozen=True)

    nu: float = Field(gt=0)
    ell: float = Field(gt=0)
    variance: float = Field(default=FIELD_CONFIG["variance"], gt=0)

    @property
    def label(self) -> str:
        return f"nu={self.nu:g},ell={self.ell:g}"


@dataclass
class CovarianceMatrix:
    """Symmetric PSD p x p matrix bound to a grid"""

    entries: np.ndarray
    grid: Optional[SphereGrid] = None
    metadata: Dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def correlation(self) -> np.ndarray:
        """Normalisasi ke correlation matrix"""
        std = np.sqrt(np.diag(self.entries))
        corr = self.entries / np.outer(std, std)
        np.fill_diagonal(corr, 1.0)
        return corr


def chordal_length(d):
    """Chord length 2 sin(d/2) untuk sudut great-circle d"""
    return 2.0 * np.sin(np.asarray(d, dtype=float) / 2.0)


def matern_correlation(d, params: MaternParams):
    """
    Korelasi Matern pada chordal distance

    Args:
        d: Great-circle angle(s) dalam radian, 0 <= d <= pi
        params: MaternParams

    Returns:
        Correlation in (0, 1]; scalar for scalar input
    """
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr < 0) or np.any(d_arr > np.pi + 1e-12):
        raise InvalidArgumentError("distance must lie in [0, pi]")

    c = chordal_length(d_arr)
    nu, ell = params.nu, params.ell

    if nu == 0.5:
        out = np.exp(-c / ell)
    elif nu == 1.5:
        scaled = np.sqrt(3.0) * c / ell
        out = (1.0 + scaled) * np.exp(-scaled)
    elif nu == 2.5:
        scaled = np.sqrt(5.0) * c / ell
        out = (1.0 + scaled + scaled ** 2 / 3.0) * np.exp(-scaled)
    else:
        scaled = np.sqrt(2.0 * nu) * c / ell
        with np.errstate(invalid="ignore"):
            out = (2.0 ** (1.0 - nu) / gamma(nu)) * scaled ** nu * kv(nu, scaled)
        out = np.where(scaled == 0.0, 1.0, out)
        out = np.nan_to_num(out, nan=0.0)

    return float(out) if np.ndim(out) == 0 else out


def ground_truth_covariance(grid: SphereGrid, params: MaternParams) -> CovarianceMatrix:
    """
    Ground-truth covariance Sigma_ij = variance * k(|v_i - v_j|)

    Kernel di-evaluasi pada koordinat 3D, sehingga jaraknya chordal.

    Raises:
        InternalError: kalau matrix tidak PSD dalam toleransi
    """
    kernel = Matern(length_scale=params.ell, nu=params.nu, length_scale_bounds="fixed")
    corr = kernel(grid.xyz)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    entries = params.variance * corr

    eigenvalues = np.linalg.eigvalsh(entries)
    floor = -FIELD_CONFIG["psd_tolerance"] * np.trace(entries)
    if eigenvalues[0] < floor:
        raise InternalError(
            f"Matern covariance ({params.label}) is not PSD: min eigenvalue {eigenvalues[0]:.3e}"
        )

    logger.info(f"Covariance built for {grid.size} nodes ({params.label})")
    return CovarianceMatrix(
        entries=entries,
        grid=grid,
        metadata={"params": params.model_dump(), "min_eigenvalue": float(eigenvalues[0])},
    )


def lognormal_correlation(k_val, sigma2: float):
    """Pearson correlation dari exp(sigma * X) untuk korelasi Gaussian k_val"""
    if sigma2 <= 0:
        raise InvalidArgumentError(f"sigma2 must be positive, got {sigma2}")
    return np.expm1(sigma2 * np.asarray(k_val, dtype=float)) / np.expm1(sigma2)


def _check_autocorr(autocorr, p: int) -> np.ndarray:
    a = np.broadcast_to(np.asarray(autocorr, dtype=float), (p,)).copy()
    if np.any(np.abs(a) >= 1.0):
        raise InvalidArgumentError("autocorrelation coefficients must satisfy |a_i| < 1")
    return a


def innovation_covariance(sigma: CovarianceMatrix, autocorr) -> CovarianceMatrix:
    """
    Innovation covariance untuk VAR(1) dengan A = diag(a)

    Sigma_eps_ij = Sigma_ij * (1 - a_i a_j). Eigenvalue negatif digeser ke
    FIELD_CONFIG["innovation_floor"] dan repair dicatat di metadata.
    """
    a = _check_autocorr(autocorr, sigma.size)
    entries = sigma.entries * (1.0 - np.outer(a, a))
    entries = 0.5 * (entries + entries.T)

    metadata = {"repaired": False, "shifted_eigenvalues": 0, "shifted_mass": 0.0}
    eigenvalues, eigenvectors = np.linalg.eigh(entries)
    negative = eigenvalues < 0
    if np.any(negative):
        floor = FIELD_CONFIG["innovation_floor"]
        metadata.update({
            "repaired": True,
            "shifted_eigenvalues": int(negative.sum()),
            "shifted_mass": float(np.sum(floor - eigenvalues[negative])),
        })
        eigenvalues = np.where(negative, floor, eigenvalues)
        entries = (eigenvectors * eigenvalues) @ eigenvectors.T
        entries = 0.5 * (entries + entries.T)
        logger.warning(
            f"Innovation covariance repaired: {metadata['shifted_eigenvalues']} negative "
            f"eigenvalues shifted, mass {metadata['shifted_mass']:.3e}"
        )

    return CovarianceMatrix(entries=entries, grid=sigma.grid, metadata=metadata)


def stationary_covariance(innovation: CovarianceMatrix, autocorr) -> np.ndarray:
    """Stationary covariance VAR(1) diagonal: Sigma_eps_ij / (1 - a_i a_j)"""
    a = _check_autocorr(autocorr, innovation.size)
    return innovation.entries / (1.0 - np.outer(a, a))


def sampling_factor(entries: np.ndarray):
    """
    Faktor L dengan L L^T ~ entries

    Cholesky dicoba dulu; kalau gagal, eigendecomposition dengan eigenvalue
    di-clip pada FIELD_CONFIG["clip_relative"] * lambda_max.

    Returns:
        Tuple (L, method)
    """
    try:
        return np.linalg.cholesky(entries), "cholesky"
    except np.linalg.LinAlgError:
        pass

    try:
        eigenvalues, eigenvectors = np.linalg.eigh(entries)
    except np.linalg.LinAlgError as e:
        raise InternalError(f"Covariance factorization failed: {e}") from e
    if not np.all(np.isfinite(eigenvalues)) or eigenvalues[-1] <= 0:
        raise InternalError("Covariance factorization failed: no positive eigenvalues")

    clipped = np.maximum(eigenvalues, FIELD_CONFIG["clip_relative"] * eigenvalues[-1])
    return eigenvectors * np.sqrt(clipped), "eigh"
