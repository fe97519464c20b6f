"""
Quantile Calibration - Null quantile korelasi: analitik vs shuffle vs IAAFT
"""

from typing import Iterable
import logging

import numpy as np
import pandas as pd
from tqdm import tqdm

from app.exceptions import InvalidArgumentError
from app.field.autocorr import analytic_quantile, simulate_ar1
from app.seeds import derive_seed
from app.surrogates.timeseries import iaaft_surrogates, shuffle_surrogates

logger = logging.getLogger(__name__)


def _row_correlation(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pearson per baris antara dua array (rows, n)"""
    x = x - x.mean(axis=1, keepdims=True)
    y = y - y.mean(axis=1, keepdims=True)
    denom = np.sqrt(np.sum(x * x, axis=1) * np.sum(y * y, axis=1))
    return np.sum(x * y, axis=1) / denom


def quantile_calibration(
    n: int,
    autocorrs: Iterable[float],
    m_shuffles: int = 1000,
    seed: int = 0,
    level: float = 0.95,
    pairs: int = 5,
) -> pd.DataFrame:
    """
    Quantile null korelasi per nilai autokorelasi

    Untuk setiap a: analytic dari asymptotic variance, empirical dari m pasang
    AR(1) independen, lalu shuffle dan IAAFT dari surrogate satu pasang AR(1)
    (dirata-rata atas `pairs` pasang).

    Args:
        n: Panjang series
        autocorrs: Nilai autokorelasi (sama untuk kedua series)
        m_shuffles: Jumlah surrogate per pasang (>= 100)
        seed: Master seed
        level: Quantile level
        pairs: Jumlah pasang independen yang dirata-rata

    Returns:
        DataFrame kolom autocorr, analytic, empirical, shuffle, iaaft
    """
    if m_shuffles < 100:
        raise InvalidArgumentError(f"m_shuffles must be >= 100, got {m_shuffles}")
    if n < 4:
        raise InvalidArgumentError(f"n must be >= 4, got {n}")
    if pairs < 1:
        raise InvalidArgumentError(f"pairs must be >= 1, got {pairs}")

    rows = []
    for index, a in enumerate(tqdm(list(autocorrs), desc="Calibration", disable=None, leave=False)):
        a = float(a)
        reference = simulate_ar1(2 * m_shuffles, n, a, derive_seed(seed, index, "calibration:empirical"))
        empirical = np.quantile(_row_correlation(reference[:m_shuffles], reference[m_shuffles:]), level)

        shuffle_q, iaaft_q = [], []
        for k in range(pairs):
            pair_seed = derive_seed(seed, index * pairs + k, "calibration:pair")
            x, y = simulate_ar1(2, n, a, pair_seed)
            stacked = np.vstack([np.repeat(x[None, :], m_shuffles, axis=0),
                                 np.repeat(y[None, :], m_shuffles, axis=0)])

            shuffled = shuffle_surrogates(stacked, derive_seed(pair_seed, k, "calibration:shuffle"))
            shuffle_q.append(np.quantile(_row_correlation(shuffled[:m_shuffles], shuffled[m_shuffles:]), level))

            surrogates = iaaft_surrogates(stacked, seed=derive_seed(pair_seed, k, "calibration:iaaft")).values
            iaaft_q.append(np.quantile(_row_correlation(surrogates[:m_shuffles], surrogates[m_shuffles:]), level))

        rows.append({
            "autocorr": a,
            "analytic": analytic_quantile(level, n, a, a),
            "empirical": float(empirical),
            "shuffle": float(np.mean(shuffle_q)),
            "iaaft": float(np.mean(iaaft_q)),
        })
        logger.debug(f"Calibration a={a}: {rows[-1]}")

    return pd.DataFrame(rows, columns=["autocorr", "analytic", "empirical", "shuffle", "iaaft"])
