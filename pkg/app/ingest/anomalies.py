"""
Anomaly Preprocessor - Detrend, hapus klimatologi bulanan, standardisasi per node
"""

from typing import Optional
import logging

import numpy as np
import pandas as pd

from app.config import INGEST_CONFIG
from app.exceptions import InvalidArgumentError
from app.field.dataset import Dataset
from app.ingest.loader import RawGriddedSeries

logger = logging.getLogger(__name__)


class AnomalyPreprocessor:
    """Preprocessor untuk gridded time series"""

    def __init__(
        self,
        max_missing_fraction: float = None,
        constant_tolerance: float = None,
    ):
        """
        Initialize preprocessor

        Args:
            max_missing_fraction: Node dengan missing lebih dari ini di-flag
            constant_tolerance: Residual std relatif di bawah ini dianggap konstan
        """
        self.max_missing_fraction = max_missing_fraction or INGEST_CONFIG["max_missing_fraction"]
        self.constant_tolerance = constant_tolerance or INGEST_CONFIG["constant_tolerance"]

    @staticmethod
    def month_index(timestamps: Optional[pd.DataFrame], n: int) -> Optional[np.ndarray]:
        """Calendar month (0..11) per time step, None tanpa calendar"""
        if timestamps is None:
            return None
        return timestamps["month"].to_numpy(dtype=int) - 1

    def design_matrix(self, n: int, months: Optional[np.ndarray]) -> np.ndarray:
        """
        Design [trend, month dummies] atau [1, trend]

        Month dummies menggantikan intercept, sehingga trend dan klimatologi
        di-fit bersama dalam satu least-squares.
        """
        trend = (np.arange(n) - (n - 1) / 2.0) / max(n, 1)
        if months is None:
            return np.column_stack([np.ones(n), trend])
        present = np.unique(months)
        dummies = (months[:, None] == present[None, :]).astype(float)
        return np.column_stack([trend, dummies])

    def fill_missing(self, values: np.ndarray, months: Optional[np.ndarray]):
        """
        Flag node dengan missing > batas, isi sisanya dengan rata-rata bulanan node

        Returns:
            Tuple (filled values, flagged mask, jumlah cell yang diisi)
        """
        values = values.copy()
        missing = np.isnan(values)
        fraction = missing.mean(axis=1)
        flagged = fraction > self.max_missing_fraction
        n_filled = 0

        for i in np.flatnonzero(missing.any(axis=1) & ~flagged):
            row = values[i]
            gaps = np.isnan(row)
            if months is None:
                row[gaps] = np.nanmean(row)
            else:
                for month in np.unique(months[gaps]):
                    same = months == month
                    observed = row[same & ~gaps]
                    row[same & gaps] = observed.mean() if observed.size else np.nanmean(row)
            n_filled += int(gaps.sum())

        values[flagged] = 0.0
        return values, flagged, n_filled

    def remove_trend_and_climatology(self, values: np.ndarray, months: Optional[np.ndarray]) -> np.ndarray:
        """Residual dari joint least-squares fit pada design matrix"""
        design = self.design_matrix(values.shape[1], months)
        coef, *_ = np.linalg.lstsq(design, values.T, rcond=None)
        return values - (design @ coef).T

    def standardize(self, residual: np.ndarray, raw_std: np.ndarray):
        """
        Standardisasi per node (ddof=0)

        Returns:
            Tuple (standardized values, constant mask)
        """
        std = residual.std(axis=1)
        constant = std <= self.constant_tolerance * np.maximum(1.0, raw_std)
        safe_std = np.where(constant, 1.0, std)
        out = (residual - residual.mean(axis=1, keepdims=True)) / safe_std[:, None]
        out[constant] = 0.0
        return out, constant

    def preprocess(self, raw: RawGriddedSeries) -> Dataset:
        """
        Pipeline lengkap: fill missing, detrend + deseasonalize, standardize

        Args:
            raw: RawGriddedSeries

        Returns:
            Dataset anomali; node yang di-flag bernilai 0
        """
        months = self.month_index(raw.timestamps, raw.n)
        if months is not None and raw.n < 2 * INGEST_CONFIG["months_per_year"]:
            raise InvalidArgumentError(
                f"Climatology removal needs at least two full cycles, got n={raw.n}"
            )
        if raw.n < 3:
            raise InvalidArgumentError(f"Anomalies need at least 3 time steps, got n={raw.n}")

        filled, missing_flag, n_filled = self.fill_missing(raw.values, months)
        raw_std = filled.std(axis=1)
        residual = self.remove_trend_and_climatology(filled, months)
        values, constant = self.standardize(residual, raw_std)

        flagged = missing_flag | constant
        values[flagged] = 0.0
        if flagged.any():
            logger.warning(
                f"{int(missing_flag.sum())} nodes flagged for missing data, "
                f"{int((constant & ~missing_flag).sum())} for constant series"
            )

        return Dataset(
            values=values,
            grid=raw.grid,
            calendar=raw.timestamps,
            flagged=flagged,
            metadata={
                "preprocessing": "anomalies",
                "flagged_missing": np.flatnonzero(missing_flag).tolist(),
                "flagged_constant": np.flatnonzero(constant & ~missing_flag).tolist(),
                "filled_cells": n_filled,
                "climatology": months is not None,
            },
        )


def anomalies(raw: RawGriddedSeries, **kwargs) -> Dataset:
    """Shortcut untuk AnomalyPreprocessor(**kwargs).preprocess(raw)"""
    return AnomalyPreprocessor(**kwargs).preprocess(raw)


def dataset_to_raw(data: Dataset) -> RawGriddedSeries:
    """Bungkus Dataset kembali sebagai raw series (untuk re-processing)"""
    return RawGriddedSeries(values=data.values.copy(), grid=data.grid, timestamps=data.calendar)
