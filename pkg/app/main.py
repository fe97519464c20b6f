"""
Spurious Network Lab - Command line interface

Jalankan dengan `python -m app.main <command> ...`
"""

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.config import BUNDLE_CONFIG, LAB_CONFIG, LOG_LEVEL, OUTPUT_DIR, SURROGATE_CONFIG
from app.exceptions import ConfigError, FormatError, InvalidArgumentError, LabError, UndefinedResultError

logger = logging.getLogger("app")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_DATA = 3


def _floats(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got '{text}'") from None


def _output(args, default_name: str) -> Path:
    return Path(args.out) if args.out else OUTPUT_DIR / default_name


def _print_json(payload):
    from app.network.graph import to_jsonable

    print(json.dumps(to_jsonable(payload), indent=2, sort_keys=True))


def _node_column(path: str, column: str, size: int):
    """Satu kolom per node dari CSV (opsional kolom index 0..p-1)"""
    import numpy as np
    import pandas as pd

    try:
        df = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FormatError(f"Cannot read {column} file {path}: {e}") from e
    if column not in df.columns:
        raise FormatError(f"{path} is missing column '{column}'")
    if "index" in df.columns:
        df = df.sort_values("index", kind="stable")
        if not np.array_equal(df["index"].to_numpy(), np.arange(len(df))):
            raise FormatError(f"{path} must index nodes 0..p-1")
    if len(df) != size:
        raise FormatError(f"{path} has {len(df)} rows, grid has {size} nodes")
    values = df[column]
    if values.isna().any():
        raise FormatError(f"{path} has missing values in column '{column}'")
    return values.to_numpy()


def _noise_mask(path: str, size: int):
    values = _node_column(path, "mask", size)
    if values.dtype != bool:
        if not set(values.tolist()) <= {0, 1}:
            raise FormatError(f"{path}: mask must be boolean or 0/1")
        values = values.astype(bool)
    return values


def _scheme_params(args) -> dict:
    params = {}
    for name in ("density", "tau", "k", "level"):
        value = getattr(args, name, None)
        if value is not None:
            params[name] = value
    return params


# ==================== Commands ====================

def cmd_run(args) -> int:
    from app.lab.experiment import load_experiment_config, run_experiment

    config = load_experiment_config(args.config)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    report = run_experiment(config, output_dir=args.out, threads=args.threads, registry=not args.no_registry)
    print(f"{report.status}: {report.output_dir / 'report.json'}")
    return EXIT_OK if report.status != "failed" else EXIT_ERROR


def cmd_grid(args) -> int:
    from app.grid import fekete_grid, gaussian_grid, isotropy_summary

    if args.kind == "fekete":
        grid = fekete_grid(args.points, args.iterations, args.seed or 0)
    else:
        grid = gaussian_grid(args.resolution)
    path = grid.to_csv(_output(args, f"grid_{args.kind}_{grid.size}.csv"))
    logger.info(f"Grid with {grid.size} nodes written to {path}")
    _print_json({"path": str(path), "size": grid.size, **isotropy_summary(grid)})
    return EXIT_OK


def cmd_simulate(args) -> int:
    from app.field import FieldSpec, MaternParams, NoiseSpec, anisotropic_autocorr, simulate
    from app.grid import SphereGrid
    from app.seeds import derive_seed

    grid = SphereGrid.from_csv(args.grid)
    seed = args.seed or 0
    anisotropic = args.autocorr_low is not None or args.autocorr_high is not None
    if anisotropic and args.autocorr_file:
        raise InvalidArgumentError("--autocorr-file cannot be combined with --autocorr-low/--autocorr-high")
    if anisotropic:
        if args.autocorr_low is None or args.autocorr_high is None:
            raise InvalidArgumentError("--autocorr-low and --autocorr-high must be given together")
        autocorr = anisotropic_autocorr(grid.size, args.autocorr_low, args.autocorr_high,
                                        derive_seed(seed, 0, "autocorr"))
    elif args.autocorr_file:
        autocorr = _node_column(args.autocorr_file, "autocorr", grid.size).astype(float)
    else:
        autocorr = args.autocorr

    if args.noise_mask and args.noise <= 0:
        raise InvalidArgumentError("--noise-mask needs a positive --noise amplitude")
    mask = _noise_mask(args.noise_mask, grid.size) if args.noise_mask else [True] * grid.size
    noise = NoiseSpec(mask=mask, amplitude=args.noise) if args.noise > 0 else None
    spec = FieldSpec(
        matern=MaternParams(nu=args.nu, ell=args.ell, variance=args.variance),
        autocorr=autocorr,
        marginal=args.marginal,
        lognormal_sigma2=args.sigma2,
        noise=noise,
    )
    data = simulate(grid, spec, args.n, seed)
    path = data.to_csv(_output(args, f"simulated_{spec.matern.label}.csv"))
    _print_json({"path": str(path), "p": data.p, "n": data.n, **data.metadata})
    return EXIT_OK


def cmd_ingest(args) -> int:
    from app.ingest import anomalies, load_gridded

    raw = load_gridded(args.grid, args.data, args.timestamps)
    data = anomalies(raw)
    path = data.to_csv(_output(args, "anomalies.csv"))
    _print_json({"path": str(path), "p": data.p, "n": data.n, "flagged": int(data.flagged.sum())})
    return EXIT_OK


def cmd_estimate(args) -> int:
    from app.field import Dataset
    from app.similarity import estimate_similarity

    data = Dataset.from_csv(args.data)
    options = {}
    if args.estimator == "mi_binned" and args.bins:
        options["bins"] = args.bins
    if args.estimator == "mi_ksg":
        options.update({"k": args.k, "seed": args.seed or 0})
    sim = estimate_similarity(data, args.estimator, **options)
    path = _output(args, f"similarity_{args.estimator}.{'csv' if args.format == 'csv' else 'bin'}")
    path = sim.to_csv(path) if args.format == "csv" else sim.save_binary(path)
    _print_json({"path": str(path), "estimator": sim.estimator, "p": sim.p, **sim.metadata})
    return EXIT_OK


def cmd_net(args) -> int:
    from app.grid import SphereGrid
    from app.network import build_network
    from app.similarity import load_similarity
    from app.surrogates import load_baseline

    sim = load_similarity(args.similarity)
    grid = SphereGrid.from_csv(args.grid) if args.grid else None
    params = _scheme_params(args)
    if args.baseline:
        params["baseline"] = load_baseline(args.baseline)
    net = build_network(sim, args.scheme, args.weighted, grid, **params)
    path = net.to_csv(_output(args, f"network_{args.scheme}.csv"))
    _print_json({"path": str(path), "n_edges": net.n_edges, "density": net.density})
    return EXIT_OK


def cmd_measure(args) -> int:
    from app.grid import SphereGrid
    from app.network import load_network, measure_report, MEASURES

    grid = SphereGrid.from_csv(args.grid)
    net = load_network(args.network, grid)
    measures = args.measures.split(",") if args.measures else MEASURES
    report = measure_report(net, grid, measures, bins=args.bins, eps=math.radians(args.mad_eps_deg),
                            seed=args.seed or 0)
    directory = _output(args, "measures")
    report.to_csv(directory)
    report.to_json(directory / "report.json")
    _print_json(report.scalars)
    return EXIT_OK


def cmd_bundles(args) -> int:
    from app.grid import SphereGrid
    from app.network import BundleSpec, bundle_report_frame, bundle_scan, load_network

    grid = SphereGrid.from_csv(args.grid)
    net = load_network(args.network, grid)
    reference = load_network(args.reference, grid) if args.reference else None
    spec = BundleSpec(eps=math.radians(args.eps_deg), c=args.c, kind=args.kind)
    scan = bundle_scan(net, grid, spec, link_filter=args.filter, reference=reference,
                       length=args.length)
    path = _output(args, f"bundles_{args.kind}.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    bundle_report_frame(net, grid, spec).to_csv(path, index=False, float_format="%.17g")
    _print_json({"path": str(path), **vars(scan)})
    return EXIT_OK


def cmd_surrogate(args) -> int:
    from app.field import Dataset
    from app.surrogates import edge_baseline

    data = Dataset.from_csv(args.data)
    baseline = edge_baseline(data, args.estimator, args.method, args.m, levels=args.quantiles,
                             seed=args.seed or 0, threads=args.threads)
    path = baseline.save_binary(_output(args, f"baseline_{args.method}.bin"))
    _print_json({"path": str(path), "method": baseline.method, "m": baseline.m, "levels": baseline.levels})
    return EXIT_OK


def cmd_ensemble(args) -> int:
    from app.field import Dataset
    from app.lab import ConstructionSpec, ensemble_pipeline

    data = Dataset.from_csv(args.data)
    construction = ConstructionSpec(estimator=args.estimator, scheme=args.scheme, params=_scheme_params(args),
                                    weighted=args.weighted)
    result = ensemble_pipeline(data, construction, args.members, scheme=args.resample,
                               block_len=args.block_len, window=args.window, stride=args.stride,
                               seed=args.seed or 0, threads=args.threads)
    directory = _output(args, "ensemble")
    directory.mkdir(parents=True, exist_ok=True)
    result.edge_table().to_csv(directory / "edge_frequencies.csv", index=False, float_format="%.17g")
    stable = result.stable_network(args.cutoff)
    stable.to_csv(directory / "stable_network.csv")
    _print_json({"directory": str(directory), "members": result.m, "stable_edges": stable.n_edges,
                 "unstable_fraction": result.unstable_fraction()})
    return EXIT_OK


def cmd_calibrate(args) -> int:
    from app.lab import quantile_calibration

    frame = quantile_calibration(args.n, args.autocorrs, args.m, seed=args.seed or 0, level=args.level)
    path = _output(args, "calibration.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g")
    print(frame.to_string(index=False))
    return EXIT_OK


# ==================== Parser ====================

def _add_scheme_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--scheme", default="density", choices=("density", "threshold", "knn", "zscore", "quantile"))
    parser.add_argument("--density", type=float)
    parser.add_argument("--tau", type=float)
    parser.add_argument("--k", type=int)
    parser.add_argument("--level", type=float)
    parser.add_argument("--weighted", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Master seed")
    common.add_argument("--out", default=None, help="Output file atau direktori")
    common.add_argument("--threads", type=int, default=None, help="Worker thread")
    common.add_argument("--log-level", default=LOG_LEVEL, help="DEBUG, INFO, WARNING, ...")

    parser = argparse.ArgumentParser(prog="lab", description="Spurious features in correlation networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="Jalankan eksperimen dari config KEY=VALUE")
    p.add_argument("config")
    p.add_argument("--no-registry", action="store_true", help="Jangan catat run di registry")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("grid", parents=[common], help="Bangun sphere grid")
    p.add_argument("--kind", choices=("fekete", "gaussian"), default="fekete")
    p.add_argument("--points", type=int, default=1483)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--resolution", type=float, default=5.0, help="Resolusi Gaussian grid (derajat)")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("simulate", parents=[common], help="Simulasi dataset Matern")
    p.add_argument("--grid", required=True)
    p.add_argument("--nu", type=float, default=0.5)
    p.add_argument("--ell", type=float, default=0.1)
    p.add_argument("--variance", type=float, default=1.0)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--autocorr", type=float, default=0.0)
    p.add_argument("--autocorr-low", type=float, default=None)
    p.add_argument("--autocorr-high", type=float, default=None)
    p.add_argument("--marginal", choices=("gaussian", "lognormal"), default="gaussian")
    p.add_argument("--sigma2", type=float, default=10.0)
    p.add_argument("--autocorr-file", default=None, help="CSV per node dengan kolom autocorr")
    p.add_argument("--noise", type=float, default=0.0, help="Amplitudo nugget noise")
    p.add_argument("--noise-mask", default=None, help="CSV per node dengan kolom mask (default semua node)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", parents=[common], help="Raw gridded series -> anomali")
    p.add_argument("--grid", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--timestamps", default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("estimate", parents=[common], help="Estimasi similarity matrix")
    p.add_argument("--data", required=True)
    p.add_argument("--estimator", default="pearson_empirical",
                   choices=("pearson_empirical", "spearman", "ledoit_wolf", "mi_binned", "mi_ksg"))
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--format", choices=("binary", "csv"), default="binary")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("net", parents=[common], help="Konstruksi network dari similarity")
    p.add_argument("--similarity", required=True)
    p.add_argument("--grid", default=None)
    p.add_argument("--baseline", default=None, help="Edge baseline untuk zscore / quantile")
    _add_scheme_arguments(p)
    p.set_defaults(func=cmd_net)

    p = sub.add_parser("measure", parents=[common], help="Network measures")
    p.add_argument("--network", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--measures", default=None, help="Comma separated subset")
    p.add_argument("--bins", type=int, default=LAB_CONFIG["length_bins"])
    p.add_argument("--mad-eps-deg", type=float, default=math.degrees(LAB_CONFIG["mad_eps"]),
                   help="Radius eps-ball untuk MAD (derajat)")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("bundles", parents=[common], help="Scan link bundles")
    p.add_argument("--network", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--kind", choices=("one_to_many", "many_to_many", "locally_weighted"), default="many_to_many")
    p.add_argument("--eps-deg", type=float, default=math.degrees(BUNDLE_CONFIG["eps"]))
    p.add_argument("--c", type=float, default=BUNDLE_CONFIG["c"])
    p.add_argument("--filter", choices=("all", "longer_than", "false_links", "differing_links"), default="all")
    p.add_argument("--reference", default=None)
    p.add_argument("--length", type=float, default=None, help="Batas panjang (radian) untuk longer_than")
    p.set_defaults(func=cmd_bundles)

    p = sub.add_parser("surrogate", parents=[common], help="Edge baseline dari surrogate")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=("shuffle", "iaaft"), default="shuffle")
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--quantiles", type=_floats, default=list(SURROGATE_CONFIG["quantile_levels"]))
    p.add_argument("--estimator", default="pearson_empirical")
    p.set_defaults(func=cmd_surrogate)

    p = sub.add_parser("ensemble", parents=[common], help="Ensemble network dari resample")
    p.add_argument("--data", required=True)
    p.add_argument("--estimator", default="pearson_empirical")
    _add_scheme_arguments(p)
    p.add_argument("--members", type=int, default=20)
    p.add_argument("--resample", choices=("block_bootstrap", "subsample"), default="block_bootstrap")
    p.add_argument("--block-len", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--cutoff", type=float, default=1.0, help="Frekuensi minimal edge stabil")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("calibrate", parents=[common], help="Kalibrasi null quantile korelasi")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--autocorrs", type=_floats, default=[0.0, 0.5, 0.9])
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=cmd_calibrate)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return args.func(args)
    except ConfigError as e:
        logger.error(f"Config error: {e}")
        return EXIT_CONFIG
    except ValidationError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_CONFIG
    except (FormatError, InvalidArgumentError, UndefinedResultError) as e:
        logger.error(f"Data error: {e}")
        return EXIT_DATA
    except LabError as e:
        logger.error(f"Error: {e}")
        return EXIT_ERROR
    except Exception as e:
        logger.exception(f"Unexpected error: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
