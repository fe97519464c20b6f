"""
Ingest Module - Load data gridded dan preprocessing anomali
"""

from app.ingest.loader import RawGriddedSeries, load_gridded, save_gridded
from app.ingest.anomalies import AnomalyPreprocessor, anomalies, dataset_to_raw

__all__ = [
    "RawGriddedSeries",
    "load_gridded",
    "save_gridded",
    "AnomalyPreprocessor",
    "anomalies",
    "dataset_to_raw",
]
