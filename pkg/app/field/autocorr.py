"""
Autocorrelation - Variansi estimator korelasi di bawah autokorelasi AR(1)
"""

import numpy as np
from scipy.stats import norm

from app.exceptions import InvalidArgumentError


def asymptotic_variance(alpha, beta):
    """
    Faktor variansi empirical Pearson untuk dua AR(1) independen

    Scalar atau array (broadcast, mis. a[:, None] dan a[None, :] untuk semua pasangan).

    sigma^2_{alpha,beta} = 1 + 2 alpha beta / (1 - alpha beta)
    """
    product = np.multiply(alpha, beta)
    if np.any(np.abs(product) >= 1.0):
        raise InvalidArgumentError(f"|alpha * beta| must be < 1, got {np.max(np.abs(product))}")
    variance = 1.0 + 2.0 * product / (1.0 - product)
    return float(variance) if np.ndim(variance) == 0 else variance


def effective_length(n: int, alpha: float, beta: float) -> float:
    """Effective sample size n / sigma^2_{alpha,beta}"""
    if n < 1:
        raise InvalidArgumentError(f"n must be positive, got {n}")
    return n / asymptotic_variance(alpha, beta)


def analytic_quantile(level: float, n: int, alpha: float = 0.0, beta: float = 0.0) -> float:
    """Large-sample null quantile Phi^-1(level) * sqrt(sigma^2 / n)"""
    if not 0.0 < level < 1.0:
        raise InvalidArgumentError(f"level must lie in (0, 1), got {level}")
    return float(norm.ppf(level) * np.sqrt(asymptotic_variance(alpha, beta) / n))


def simulate_ar1(n_series: int, n: int, autocorr, seed: int) -> np.ndarray:
    """
    Simulasi AR(1) stasioner independen dengan variansi marginal 1

    Args:
        n_series: Jumlah series
        n: Panjang series
        autocorr: Koefisien lag-1 (scalar atau per series)
        seed: RNG seed

    Returns:
        Array (n_series, n)
    """
    a = np.broadcast_to(np.asarray(autocorr, dtype=float), (n_series,))
    if np.any(np.abs(a) >= 1.0):
        raise InvalidArgumentError("autocorrelation coefficients must satisfy |a| < 1")

    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n_series, n))
    out = np.empty((n_series, n))
    out[:, 0] = noise[:, 0]
    innovation_scale = np.sqrt(1.0 - a ** 2)
    for t in range(1, n):
        out[:, t] = a * out[:, t - 1] + innovation_scale * noise[:, t]
    return out


def anisotropic_autocorr(p: int, low: float, high: float, seed: int) -> np.ndarray:
    """Setengah node acak mendapat autokorelasi `high`, sisanya `low`"""
    rng = np.random.default_rng(seed)
    a = np.full(p, float(low))
    a[rng.permutation(p)[: p // 2]] = high
    return a


def lag1_autocorrelation(values: np.ndarray) -> np.ndarray:
    """Lag-1 sample autocorrelation per row"""
    x = np.atleast_2d(values)
    x = x - x.mean(axis=1, keepdims=True)
    denom = np.sum(x * x, axis=1)
    num = np.sum(x[:, 1:] * x[:, :-1], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denom > 0, num / denom, 0.0)
