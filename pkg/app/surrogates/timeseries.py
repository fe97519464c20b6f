"""
Time Series Surrogates - Node-wise shuffle dan IAAFT
"""

from dataclasses import dataclass
import logging

import numpy as np

from app.config import SURROGATE_CONFIG
from app.exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass
class IaaftResult:
    """Surrogate values plus status konvergensi per series"""

    values: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    deviation: np.ndarray


def shuffle_surrogate(series, seed: int) -> np.ndarray:
    """Random permutation dari series (multiset tetap)"""
    series = np.asarray(series, dtype=float)
    if series.size < 2:
        raise InvalidArgumentError(f"shuffle_surrogate needs n >= 2, got {series.size}")
    return np.random.default_rng(seed).permutation(series)


def shuffle_surrogates(values: np.ndarray, seed: int) -> np.ndarray:
    """Shuffle independen untuk setiap baris"""
    return np.random.default_rng(seed).permuted(np.asarray(values, dtype=float), axis=1)


def spectrum_deviation(values: np.ndarray, target_amplitude: np.ndarray) -> np.ndarray:
    """Relative L2 deviation amplitude spectrum per baris"""
    amplitude = np.abs(np.fft.rfft(values, axis=1))
    scale = np.linalg.norm(target_amplitude, axis=1)
    diff = np.linalg.norm(amplitude - target_amplitude, axis=1)
    return np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), 0.0)


def iaaft_surrogates(
    values: np.ndarray,
    max_iter: int = None,
    tol: float = None,
    seed: int = 0,
) -> IaaftResult:
    """
    Batched IAAFT surrogates

    Setiap iterasi: ganti amplitude spectrum dengan milik original (fase
    dipertahankan), lalu remap rank ke nilai original. Iterasi berhenti per
    baris saat deviation spektrum <= iaaft_spectrum_tol, atau perubahan
    relatif deviation < tol.

    Args:
        values: Array (rows, n)
        max_iter: Maksimum iterasi (default 100)
        tol: Toleransi perubahan relatif (default 1e-8)
        seed: RNG seed untuk shuffle awal

    Returns:
        IaaftResult; baris konstan dikembalikan apa adanya
    """
    max_iter = max_iter or SURROGATE_CONFIG["iaaft_max_iter"]
    tol = tol or SURROGATE_CONFIG["iaaft_tol"]
    spectrum_tol = SURROGATE_CONFIG["iaaft_spectrum_tol"]

    x = np.atleast_2d(np.asarray(values, dtype=float))
    rows, n = x.shape
    if n < 4:
        raise InvalidArgumentError(f"IAAFT needs n >= 4, got {n}")

    sorted_values = np.sort(x, axis=1)
    target = np.abs(np.fft.rfft(x, axis=1))
    constant = np.ptp(x, axis=1) == 0

    out = x.copy()
    converged = constant.copy()
    iterations = np.zeros(rows, dtype=int)
    deviation = np.zeros(rows)

    active = np.flatnonzero(~constant)
    if active.size:
        rng = np.random.default_rng(seed)
        out[active] = rng.permuted(x[active], axis=1)
    previous = np.full(rows, np.inf)

    for it in range(1, max_iter + 1):
        if active.size == 0:
            break
        spectrum = np.fft.rfft(out[active], axis=1)
        magnitude = np.abs(spectrum)
        phase = np.where(magnitude > 0, spectrum / np.where(magnitude > 0, magnitude, 1.0), 1.0)
        adjusted = np.fft.irfft(target[active] * phase, n=n, axis=1)

        ranks = np.argsort(np.argsort(adjusted, axis=1, kind="stable"), axis=1, kind="stable")
        out[active] = np.take_along_axis(sorted_values[active], ranks, axis=1)

        dev = spectrum_deviation(out[active], target[active])
        change = np.abs(previous[active] - dev) / np.maximum(dev, np.finfo(float).tiny)
        done = (dev <= spectrum_tol) | (change < tol)

        iterations[active] = it
        deviation[active] = dev
        previous[active] = dev
        converged[active[done]] = True
        active = active[~done]

    if active.size:
        logger.debug(f"IAAFT: {active.size} of {rows} series reached max_iter={max_iter}")
    return IaaftResult(values=out, converged=converged, iterations=iterations, deviation=deviation)


def iaaft_surrogate(series, max_iter: int = None, tol: float = None, seed: int = 0) -> IaaftResult:
    """IAAFT untuk satu series; result berisi vector dan status skalar"""
    result = iaaft_surrogates(np.asarray(series, dtype=float)[None, :], max_iter, tol, seed)
    return IaaftResult(
        values=result.values[0],
        converged=bool(result.converged[0]),
        iterations=int(result.iterations[0]),
        deviation=float(result.deviation[0]),
    )
