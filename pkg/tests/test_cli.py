import json

import pandas as pd
import pytest

from app.main import EXIT_CONFIG, EXIT_DATA, EXIT_OK, build_parser, main


def _last_json(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def grid_file(tmp_path, capsys):
    path = tmp_path / "grid.csv"
    assert main(["grid", "--kind", "gaussian", "--resolution", "60", "--out", str(path)]) == EXIT_OK
    capsys.readouterr()
    return path


def test_grid_command(tmp_path, capsys):
    path = tmp_path / "grid.csv"
    assert main(["grid", "--kind", "gaussian", "--resolution", "60", "--out", str(path)]) == EXIT_OK
    payload = _last_json(capsys)
    assert payload["size"] == 18
    assert list(pd.read_csv(path).columns) == ["index", "lat_deg", "lon_deg"]


def test_pipeline(tmp_path, capsys, grid_file):
    data = tmp_path / "sim.csv"
    assert main(["simulate", "--grid", str(grid_file), "--nu", "1.5", "--ell", "0.3", "--n", "40",
                 "--seed", "2", "--out", str(data)]) == EXIT_OK
    assert _last_json(capsys)["n"] == 40

    sim = tmp_path / "sim.bin"
    assert main(["estimate", "--data", str(data), "--out", str(sim)]) == EXIT_OK
    assert _last_json(capsys)["estimator"] == "pearson_empirical"

    net = tmp_path / "net.csv"
    assert main(["net", "--similarity", str(sim), "--grid", str(grid_file), "--density", "0.1",
                 "--out", str(net)]) == EXIT_OK
    assert _last_json(capsys)["n_edges"] == 16

    measures = tmp_path / "measures"
    assert main(["measure", "--network", str(net), "--grid", str(grid_file), "--measures", "degree,link_length",
                 "--out", str(measures)]) == EXIT_OK
    assert _last_json(capsys)["mean_degree"] == pytest.approx(32 / 18)
    assert (measures / "report.json").is_file()

    bundles = tmp_path / "bundles.csv"
    assert main(["bundles", "--network", str(net), "--grid", str(grid_file), "--eps-deg", "40",
                 "--out", str(bundles)]) == EXIT_OK
    assert len(pd.read_csv(bundles)) == 16


def test_run_command(tmp_path, capsys):
    config = tmp_path / "tiny.env"
    config.write_text("\n".join([
        "name=cli",
        "repetitions=2",
        "n=40",
        "grid.kind=gaussian",
        "grid.resolution=60",
        "sweep.densities=0.1",
    ]) + "\n")
    assert main(["run", str(config), "--no-registry", "--out", str(tmp_path / "out")]) == EXIT_OK
    assert capsys.readouterr().out.startswith("completed:")
    assert (tmp_path / "out" / "report.json").is_file()


def test_calibrate_command(tmp_path, capsys):
    out = tmp_path / "calibration.csv"
    assert main(["calibrate", "--n", "50", "--autocorrs", "0,0.5", "--m", "100", "--out", str(out)]) == EXIT_OK
    frame = pd.read_csv(out)
    assert frame["autocorr"].tolist() == [0.0, 0.5]


def test_missing_config_exits_with_config_code(tmp_path):
    assert main(["run", str(tmp_path / "nope.env"), "--no-registry"]) == EXIT_CONFIG


def test_bad_config_key_exits_with_config_code(tmp_path):
    config = tmp_path / "bad.env"
    config.write_text("sweep.scheme=ring\n")
    assert main(["run", str(config), "--no-registry"]) == EXIT_CONFIG


def test_invalid_bundle_arguments_exit_with_config_code(tmp_path, grid_file):
    net = tmp_path / "net.csv"
    pd.DataFrame({"i": [0], "j": [1], "weight": [1.0]}).to_csv(net, index=False)
    net.with_name("net.csv.meta.json").write_text(json.dumps({"p": 18, "weighted": False, "metadata": {}}))
    assert main(["bundles", "--network", str(net), "--grid", str(grid_file), "--c", "1.5"]) == EXIT_CONFIG


def test_malformed_grid_exits_with_data_code(tmp_path):
    bad = tmp_path / "grid.csv"
    bad.write_text("x,y\n1,2\n")
    assert main(["simulate", "--grid", str(bad)]) == EXIT_DATA


def test_missing_data_file_exits_with_data_code(tmp_path):
    assert main(["estimate", "--data", str(tmp_path / "missing.csv")]) == EXIT_DATA


def test_half_anisotropic_pair_exits_with_data_code(grid_file):
    assert main(["simulate", "--grid", str(grid_file), "--autocorr-low", "0.1"]) == EXIT_DATA


def test_parser_rejects_unknown_command():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["plot"])
    assert info.value.code == 2


def _simulated(path):
    from app.field import Dataset

    return Dataset.from_csv(path).values


def test_simulate_with_node_files(tmp_path, capsys, grid_file):
    from app.grid import SphereGrid, hemisphere_mask

    grid = SphereGrid.from_csv(grid_file)
    north = hemisphere_mask(grid)
    mask_file = tmp_path / "mask.csv"
    pd.DataFrame({"index": range(grid.size), "mask": north}).to_csv(mask_file, index=False)
    autocorr_file = tmp_path / "autocorr.csv"
    pd.DataFrame({"index": range(grid.size), "autocorr": [0.6] * grid.size}).to_csv(autocorr_file, index=False)

    common = ["simulate", "--grid", str(grid_file), "--n", "30", "--seed", "4"]
    assert main(common + ["--autocorr", "0.6", "--out", str(tmp_path / "plain.csv")]) == EXIT_OK
    assert main(common + ["--autocorr-file", str(autocorr_file), "--out", str(tmp_path / "file.csv")]) == EXIT_OK
    capsys.readouterr()
    assert main(common + ["--autocorr-file", str(autocorr_file), "--noise", "0.5", "--noise-mask", str(mask_file),
                          "--out", str(tmp_path / "noisy.csv")]) == EXIT_OK
    assert _last_json(capsys)["noise_amplitude"] == 0.5

    plain = _simulated(tmp_path / "plain.csv")
    noisy = _simulated(tmp_path / "noisy.csv")
    assert plain == pytest.approx(_simulated(tmp_path / "file.csv"))
    assert noisy[~north] == pytest.approx(plain[~north])
    assert not (noisy[north] == plain[north]).any()


def test_mad_radius_flag(tmp_path, capsys, grid_file):
    net = tmp_path / "net.csv"
    pd.DataFrame({"i": [0, 0], "j": [1, 2], "weight": [1.0, 1.0]}).to_csv(net, index=False)
    net.with_name("net.csv.meta.json").write_text(json.dumps({"p": 18, "weighted": False, "metadata": {}}))
    args = ["measure", "--network", str(net), "--grid", str(grid_file), "--measures", "mad",
            "--out", str(tmp_path / "measures")]
    assert main(args + ["--mad-eps-deg", "200"]) == EXIT_OK
    # radius melebihi pi: setiap ball berisi semua node
    assert _last_json(capsys)["mad_ratio"] == pytest.approx(1.0)
    assert main(args + ["--mad-eps-deg", "0"]) == EXIT_DATA


@pytest.mark.parametrize("column, rows, extra", [
    ("mask", 5, ["--noise", "0.5", "--noise-mask"]),
    ("autocorr", 5, ["--autocorr-file"]),
    ("weight", 18, ["--autocorr-file"]),
])
def test_bad_node_file_exits_with_data_code(tmp_path, grid_file, column, rows, extra):
    bad = tmp_path / "nodes.csv"
    pd.DataFrame({column: [0] * rows}).to_csv(bad, index=False)
    assert main(["simulate", "--grid", str(grid_file), "--n", "10"] + extra + [str(bad)]) == EXIT_DATA


def test_noise_mask_needs_amplitude(tmp_path, grid_file):
    mask_file = tmp_path / "mask.csv"
    pd.DataFrame({"mask": [True] * 18}).to_csv(mask_file, index=False)
    assert main(["simulate", "--grid", str(grid_file), "--noise-mask", str(mask_file)]) == EXIT_DATA


def test_grid_with_coinciding_points_exits_with_data_code(tmp_path):
    grid = tmp_path / "grid.csv"
    pd.DataFrame({"index": [0, 1, 2], "lat_deg": [0.0, 45.0, 0.0], "lon_deg": [0.0, 90.0, 360.0]}).to_csv(
        grid, index=False)
    assert main(["simulate", "--grid", str(grid), "--n", "10"]) == EXIT_DATA
