import json

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from app.exceptions import ConfigError, InvalidArgumentError
from app.field import FieldSpec, analytic_quantile, simulate
from app.grid import gaussian_grid
from app.ingest import RawGriddedSeries, save_gridded
from app.lab import (
    ConstructionSpec,
    ExperimentConfig,
    aggregate_records,
    config_hash,
    ensemble_pipeline,
    fold_dotted,
    load_experiment_config,
    parse_experiment_config,
    quantile_calibration,
    run_experiment,
)
from app.network import threshold_by_density

TINY = {
    "name": "tiny",
    "seed": 3,
    "repetitions": 3,
    "n": 60,
    "grid": {"kind": "gaussian", "resolution": 60},
    "simulation": {"nu": 1.5, "ell": 0.3},
    "sweep": {"densities": "0.1,0.2"},
    "measures": "degree,clustering,link_length",
    "bundles": {"kinds": "many_to_many", "eps_deg": 40},
}


def _write_config(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def small_data(smooth_params):
    grid = gaussian_grid(60.0)
    return simulate(grid, FieldSpec(matern=smooth_params), n=80, seed=1)


class TestConstructionSpec:
    def test_label(self):
        spec = ConstructionSpec(estimator="pearson_empirical", scheme="density", params={"density": 0.05})
        assert spec.label == "pearson_empirical_density_density0.05"
        weighted = ConstructionSpec(estimator="spearman", scheme="knn", params={"k": 3}, weighted=True)
        assert weighted.label == "spearman_knn_w_k3"
        assert weighted.parameter == ("k", 3)

    def test_validation(self):
        with pytest.raises(ValidationError):
            ConstructionSpec(estimator="kendall", params={"density": 0.1})
        with pytest.raises(ValidationError):
            ConstructionSpec(scheme="ring", params={"density": 0.1})
        with pytest.raises(ValidationError):
            ConstructionSpec(scheme="threshold", params={"density": 0.1})
        with pytest.raises(ValidationError):
            ConstructionSpec(params={"density": 0.1}, baseline_m=1)

    def test_build_matches_builder(self, small_data):
        spec = ConstructionSpec(params={"density": 0.1})
        sim, net = spec.build(small_data)
        expected = threshold_by_density(sim, 0.1, grid=small_data.grid)
        np.testing.assert_array_equal(net.adjacency, expected.adjacency)
        assert net.metadata["construction"] == spec.label

    def test_zscore_builds_own_baseline(self, small_data):
        spec = ConstructionSpec(scheme="zscore", params={"density": 0.1}, baseline_m=10)
        assert spec.needs_baseline
        _, net = spec.build(small_data, seed=2)
        assert net.n_edges == 16


class TestConfig:
    def test_fold_dotted(self):
        nested = fold_dotted({"name": "x", "grid.kind": "gaussian", "grid.resolution": "30"})
        assert nested == {"name": "x", "grid": {"kind": "gaussian", "resolution": "30"}}

    @pytest.mark.parametrize("flat", [{"a": "1", "a.b": "2"}, {"a.b": "2", "a": "1"}])
    def test_fold_dotted_conflict(self, flat):
        with pytest.raises(ConfigError) as info:
            fold_dotted(flat)
        assert info.value.path == "a"

    def test_fold_dotted_missing_value(self):
        with pytest.raises(ConfigError) as info:
            fold_dotted({"seed": None})
        assert info.value.path == "seed"

    def test_load_from_file(self, tmp_path):
        path = _write_config(tmp_path / "run.env", [
            "# sweep kecil",
            "name=demo",
            "seed=11",
            "grid.kind=gaussian",
            "grid.resolution=30",
            "simulation.nu=1.5",
            "simulation.autocorr=0.4",
            "sweep.estimators=pearson_empirical,spearman",
            "sweep.densities=0.01,0.05",
            "bundles.kinds=one_to_many",
            "measures=degree,mad",
        ])
        config = load_experiment_config(path)
        assert config.name == "demo" and config.seed == 11
        assert config.grid.build().size == 72
        assert config.source.autocorr == 0.4
        assert config.simulated
        labels = [spec.label for spec in config.sweep.constructions()]
        assert labels == [
            "pearson_empirical_density_density0.01",
            "pearson_empirical_density_density0.05",
            "spearman_density_density0.01",
            "spearman_density_density0.05",
        ]
        assert config.measures == ["degree", "mad"]
        assert [spec.kind for spec in config.bundles.specs()] == ["one_to_many"]

    def test_defaults(self):
        config = parse_experiment_config({})
        assert config.simulated
        assert config.source.nu == 0.5
        assert config.sweep.densities == [0.005]
        assert config.mad_eps_deg == pytest.approx(10.0)
        assert parse_experiment_config({"mad_eps_deg": "15"}).mad_eps_deg == 15.0

    @pytest.mark.parametrize("line, path", [
        ("sweep.scheme=ring", "sweep.scheme"),
        ("grid.colour=red", "grid.colour"),
        ("repetitions=0", "repetitions"),
        ("sweep.densities=0.1,abc", "sweep.densities"),
        ("measures=degree,pagerank", "measures"),
        ("mad_eps_deg=0", "mad_eps_deg"),
    ])
    def test_invalid_key_reports_path(self, tmp_path, line, path):
        config_file = _write_config(tmp_path / "bad.env", ["name=bad", line])
        with pytest.raises(ConfigError) as info:
            load_experiment_config(config_file)
        assert info.value.path == path

    def test_simulation_and_data_conflict(self):
        with pytest.raises(ConfigError):
            parse_experiment_config({
                "simulation": {"nu": "1.5"},
                "data": {"grid_file": "grid.csv", "data_file": "data.csv"},
            })

    def test_subsample_needs_window(self):
        with pytest.raises(ConfigError) as info:
            parse_experiment_config({"data": {"grid_file": "g.csv", "data_file": "d.csv", "resample": "subsample"}})
        assert info.value.path == "data"

    def test_anisotropic_pair_given_together(self):
        with pytest.raises(ConfigError):
            parse_experiment_config({"simulation": {"autocorr_low": "0.1"}})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_experiment_config(tmp_path / "nope.env")

    def test_config_hash(self):
        a = parse_experiment_config(TINY)
        b = parse_experiment_config(dict(TINY))
        assert config_hash(a) == config_hash(b)
        assert len(config_hash(a)) == 64
        assert config_hash(a) != config_hash(a.model_copy(update={"seed": 4}))


class TestAggregate:
    def test_mean_and_band(self):
        records = pd.DataFrame({
            "rep": [0, 1, 2, 0],
            "label": ["a", "a", "a", "b"],
            "parameter": [0.1, 0.1, 0.1, 0.2],
            "fdr": [0.1, 0.2, 0.3, 0.5],
            "estimator": ["pearson_empirical"] * 4,
        })
        aggregates = aggregate_records(records, band=(0.0, 1.0))
        assert set(aggregates) == {"a", "b"}
        assert set(aggregates["a"]) == {"fdr"}
        assert aggregates["a"]["fdr"]["mean"] == pytest.approx(0.2)
        assert aggregates["a"]["fdr"]["q0"] == pytest.approx(0.1)
        assert aggregates["a"]["fdr"]["q1"] == pytest.approx(0.3)
        assert aggregates["b"]["fdr"]["count"] == 1

    def test_missing_values_are_skipped(self):
        records = pd.DataFrame({"rep": [0, 1], "label": ["a", "a"], "differing_fraction": [np.nan, 0.4]})
        aggregates = aggregate_records(records)
        assert aggregates["a"]["differing_fraction"]["count"] == 1

    def test_empty(self):
        assert aggregate_records(pd.DataFrame()) == {}


class TestRunExperiment:
    def test_tiny_sweep(self, tmp_path):
        config = parse_experiment_config(TINY)
        report = run_experiment(config, output_dir=tmp_path / "out", threads=1, registry=False)

        assert report.status == "completed"
        records = report.records
        assert len(records) == 6
        for column in ("fdr", "missing_edge_rate", "frobenius_rms", "mean_degree",
                       "bundle_many_to_many_fraction", "bundle_many_to_many_false_fraction"):
            assert column in records.columns
        label = "pearson_empirical_density_density0.1"
        assert set(records.loc[records["label"] == label, "n_edges"]) == {16}
        assert report.truth[label]["n_edges"] == 16

        payload = json.loads((tmp_path / "out" / "report.json").read_text())
        assert set(payload) == {"config", "provenance", "status", "aggregates", "failures", "truth"}
        assert payload["provenance"]["config_hash"] == config_hash(config)
        assert len(payload["provenance"]["repetition_seeds"]) == 3
        assert payload["aggregates"][label]["fdr"]["count"] == 3
        assert (tmp_path / "out" / "per_rep" / "records.csv").is_file()

    def test_deterministic_across_threads(self, tmp_path):
        config = parse_experiment_config(TINY)
        one = run_experiment(config, output_dir=tmp_path / "one", threads=1, registry=False)
        many = run_experiment(config, output_dir=tmp_path / "many", threads=3, registry=False)
        pd.testing.assert_frame_equal(one.records, many.records)
        assert (tmp_path / "one" / "report.json").read_text() == (tmp_path / "many" / "report.json").read_text()

    def test_anisotropic_degree_gap(self, tmp_path):
        values = dict(TINY, repetitions=2, simulation={"nu": 1.5, "ell": 0.3,
                                                       "autocorr_low": 0.1, "autocorr_high": 0.9})
        report = run_experiment(parse_experiment_config(values), output_dir=tmp_path, threads=1, registry=False)
        assert "degree_gap" in report.records.columns
        assert report.records["degree_low_autocorr"].notna().all()

    def test_failing_repetitions_are_recorded(self, tmp_path):
        values = dict(TINY, n=8, sweep={"estimators": "mi_binned", "densities": "0.1"})
        report = run_experiment(parse_experiment_config(values), output_dir=tmp_path, threads=1, registry=False)
        assert report.status == "failed"
        assert [failure["rep"] for failure in report.failures] == [0, 1, 2]
        assert "InvalidArgumentError" in report.failures[0]["error"]
        assert (tmp_path / "report.json").is_file()

    def test_registry(self, tmp_path, registry):
        from app.database import list_runs

        values = dict(TINY, repetitions=1)
        run_experiment(parse_experiment_config(values), output_dir=tmp_path / "out", threads=1)
        runs = list_runs()
        assert len(runs) == 1
        assert runs[0].status == "completed"
        assert runs[0].report_path.endswith("report.json")

    def test_data_driven_run(self, tmp_path):
        grid = gaussian_grid(60.0)
        t = np.arange(48)
        stamps = pd.DataFrame({"year": 2000 + t // 12, "month": t % 12 + 1})
        values = np.random.default_rng(5).standard_normal((grid.size, 48))
        save_gridded(RawGriddedSeries(values=values, grid=grid, timestamps=stamps),
                     tmp_path / "grid.csv", tmp_path / "data.csv", tmp_path / "time.csv")

        config = ExperimentConfig.model_validate({
            "repetitions": 2,
            "data": {"grid_file": str(tmp_path / "grid.csv"), "data_file": str(tmp_path / "data.csv"),
                     "timestamps_file": str(tmp_path / "time.csv"), "block_len": 12},
            "sweep": {"densities": [0.1]},
        })
        assert not config.simulated
        report = run_experiment(config, output_dir=tmp_path / "out", threads=1, registry=False)
        assert report.status == "completed"
        assert len(report.records) == 2
        assert "fdr" not in report.records.columns
        assert report.truth == {}


class TestEnsemble:
    def test_full_length_blocks_give_identical_members(self, small_data):
        spec = ConstructionSpec(params={"density": 0.1})
        result = ensemble_pipeline(small_data, spec, m=4, block_len=small_data.n, seed=1)
        assert result.m == 4
        assert set(np.unique(result.frequencies)) <= {0.0, 1.0}
        assert result.unstable_fraction() == 0.0
        _, direct = spec.build(small_data)
        np.testing.assert_array_equal(result.stable_network().adjacency, direct.adjacency)

    def test_bootstrap_edge_table(self, small_data):
        spec = ConstructionSpec(params={"density": 0.1})
        result = ensemble_pipeline(small_data, spec, m=5, block_len=8, seed=2, threads=2)
        table = result.edge_table()
        assert list(table.columns) == ["i", "j", "frequency", "length"]
        assert table["frequency"].between(0.2, 1.0).all()
        assert np.all(table["i"] < table["j"])
        assert result.stable_network(0.2).n_edges == len(table)

    def test_subsample(self, small_data):
        spec = ConstructionSpec(params={"density": 0.1})
        result = ensemble_pipeline(small_data, spec, m=3, scheme="subsample", window=40, stride=20)
        assert result.m == 3
        with pytest.raises(InvalidArgumentError):
            ensemble_pipeline(small_data, spec, m=3, scheme="subsample")

    def test_validation(self, small_data):
        spec = ConstructionSpec(params={"density": 0.1})
        with pytest.raises(InvalidArgumentError):
            ensemble_pipeline(small_data, spec, m=1)
        with pytest.raises(InvalidArgumentError):
            ensemble_pipeline(small_data, spec, m=3, scheme="jackknife")
        result = ensemble_pipeline(small_data, spec, m=2, block_len=small_data.n)
        with pytest.raises(InvalidArgumentError):
            result.stable_network(0.0)


class TestCalibration:
    def test_columns_and_analytic(self):
        frame = quantile_calibration(100, [0.0, 0.8], m_shuffles=200, seed=0, pairs=2)
        assert list(frame.columns) == ["autocorr", "analytic", "empirical", "shuffle", "iaaft"]
        for row in frame.itertuples():
            assert row.analytic == pytest.approx(analytic_quantile(0.95, 100, row.autocorr, row.autocorr))

    def test_shuffle_underestimates_for_autocorrelated_series(self):
        frame = quantile_calibration(100, [0.8], m_shuffles=200, seed=1, pairs=2)
        row = frame.iloc[0]
        assert row["empirical"] > row["shuffle"]
        assert row["iaaft"] > row["shuffle"]

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            quantile_calibration(100, [0.0], m_shuffles=50)
        with pytest.raises(InvalidArgumentError):
            quantile_calibration(3, [0.0], m_shuffles=100)
