import numpy as np
import pandas as pd
import pytest

from app.exceptions import FormatError, InvalidArgumentError
from app.grid import gaussian_grid
from app.ingest import (
    AnomalyPreprocessor,
    RawGriddedSeries,
    anomalies,
    dataset_to_raw,
    load_gridded,
    save_gridded,
)


def _monthly_stamps(n: int) -> pd.DataFrame:
    t = np.arange(n)
    return pd.DataFrame({"year": 2000 + t // 12, "month": t % 12 + 1})


@pytest.fixture
def raw_series():
    """18 node x 48 bulan: trend + siklus musiman + noise"""
    grid = gaussian_grid(60.0)
    n = 48
    rng = np.random.default_rng(0)
    t = np.arange(n)
    seasonal = 5.0 * np.sin(2 * np.pi * t / 12.0)
    values = 0.2 * t[None, :] + seasonal[None, :] + rng.standard_normal((grid.size, n))
    values[1, 5] = np.nan
    values[2, :10] = np.nan
    values[3, :] = 7.0
    return RawGriddedSeries(values=values, grid=grid, timestamps=_monthly_stamps(n))


def test_save_and_load_roundtrip(tmp_path, raw_series):
    paths = tmp_path / "grid.csv", tmp_path / "data.csv", tmp_path / "time.csv"
    save_gridded(raw_series, *paths)
    loaded = load_gridded(*paths)

    assert loaded.p == raw_series.p and loaded.n == raw_series.n
    np.testing.assert_array_equal(loaded.missing, raw_series.missing)
    np.testing.assert_array_equal(
        np.nan_to_num(loaded.values), np.nan_to_num(raw_series.values)
    )
    pd.testing.assert_frame_equal(loaded.timestamps, raw_series.timestamps, check_dtype=False)


def test_load_rejects_node_mismatch(tmp_path, raw_series):
    save_gridded(raw_series, tmp_path / "grid.csv", tmp_path / "data.csv")
    frame = pd.read_csv(tmp_path / "data.csv")
    frame.iloc[:-1].to_csv(tmp_path / "data.csv", index=False)
    with pytest.raises(FormatError):
        load_gridded(tmp_path / "grid.csv", tmp_path / "data.csv")


def test_load_rejects_malformed_time_columns(tmp_path, raw_series):
    save_gridded(raw_series, tmp_path / "grid.csv", tmp_path / "data.csv")
    frame = pd.read_csv(tmp_path / "data.csv").rename(columns={"t3": "x3"})
    frame.to_csv(tmp_path / "data.csv", index=False)
    with pytest.raises(FormatError):
        load_gridded(tmp_path / "grid.csv", tmp_path / "data.csv")


def test_load_rejects_decreasing_timestamps(tmp_path, raw_series):
    paths = tmp_path / "grid.csv", tmp_path / "data.csv", tmp_path / "time.csv"
    save_gridded(raw_series, *paths)
    stamps = pd.read_csv(paths[2])
    stamps.loc[4, "year"] = 1999
    stamps.to_csv(paths[2], index=False)
    with pytest.raises(FormatError):
        load_gridded(*paths)


def test_anomalies_standardize_each_node(raw_series):
    data = anomalies(raw_series)
    healthy = ~data.flagged
    np.testing.assert_allclose(data.values[healthy].mean(axis=1), 0.0, atol=1e-10)
    np.testing.assert_allclose(data.values[healthy].std(axis=1), 1.0, atol=1e-10)


def test_anomalies_remove_trend_and_season(raw_series):
    data = anomalies(raw_series)
    t = np.arange(raw_series.n)
    seasonal = np.sin(2 * np.pi * t / 12.0)
    for i in np.flatnonzero(~data.flagged):
        assert abs(np.corrcoef(data.values[i], t)[0, 1]) < 1e-8
        assert abs(np.corrcoef(data.values[i], seasonal)[0, 1]) < 1e-8


def test_anomalies_flag_missing_and_constant(raw_series):
    data = anomalies(raw_series)
    assert data.metadata["flagged_missing"] == [2]
    assert data.metadata["flagged_constant"] == [3]
    assert data.metadata["filled_cells"] == 1
    assert data.metadata["climatology"] is True
    assert np.all(data.values[[2, 3]] == 0.0)


def test_anomalies_need_two_cycles(raw_series):
    short = RawGriddedSeries(
        values=raw_series.values[:, :20], grid=raw_series.grid, timestamps=_monthly_stamps(20)
    )
    with pytest.raises(InvalidArgumentError):
        anomalies(short)


def test_anomalies_without_calendar_only_detrend(raw_series):
    raw = RawGriddedSeries(values=raw_series.values, grid=raw_series.grid)
    data = AnomalyPreprocessor().preprocess(raw)
    assert data.metadata["climatology"] is False
    assert data.calendar is None


def test_missing_threshold_is_configurable(raw_series):
    data = AnomalyPreprocessor(max_missing_fraction=0.5).preprocess(raw_series)
    assert 2 not in data.metadata["flagged_missing"]


def test_dataset_to_raw_reprocesses(coarse_dataset):
    raw = dataset_to_raw(coarse_dataset)
    assert not raw.missing.any()
    data = anomalies(raw)
    assert data.p == coarse_dataset.p
