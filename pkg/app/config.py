"""
Konfigurasi Spurious Network Lab
Default parameters for every stage of the simulation-and-analysis pipeline.
"""

import math
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Base Directory
BASE_DIR = Path(__file__).resolve().parent.parent

# Output Directory (experiment reports, networks, registry)
OUTPUT_DIR = Path(os.getenv("LAB_OUTPUT_DIR", BASE_DIR / "output"))

# Run registry
# Untuk local: SQLite di OUTPUT_DIR
# Untuk shared: PostgreSQL dari environment variable
DATABASE_URL = os.getenv("LAB_DATABASE_URL") or os.getenv("DATABASE_URL")

if DATABASE_URL:
    # Railway/Heroku format: postgres:// -> postgresql://
    if DATABASE_URL.startswith("postgres://"):
        DATABASE_URL = DATABASE_URL.replace("postgres://", "postgresql://", 1)
else:
    DATABASE_PATH = OUTPUT_DIR / "registry.db"
    DATABASE_URL = f"sqlite:///{DATABASE_PATH}"

# Runtime
THREADS = int(os.getenv("LAB_THREADS", "1"))
LOG_LEVEL = os.getenv("LAB_LOG_LEVEL", "INFO")

# Sphere grids
GRID_CONFIG = {
    "fekete_iterations": 1000,
    "fekete_step": 0.1,       # fraction of (4*pi/n) used as descent step
    "fekete_jitter": 0.1,     # fraction of mean spacing for the seeded start
    "fekete_chunk": 512,
    "unit_tolerance": 1e-9,
    "min_separation": 1e-9,  # chord length below which two points coincide
}

# Ground-truth random fields
FIELD_CONFIG = {
    "variance": 1.0,
    "psd_tolerance": 1e-8,          # eigenvalues >= -tol * trace
    "innovation_floor": 1e-8,       # negative eigenvalues of the innovation covariance go here
    "clip_relative": 1e-12,         # sampling factor clips eigenvalues at this * lambda_max
    "lognormal_sigma2": 10.0,
}

# Anomaly preprocessing
INGEST_CONFIG = {
    "missing_tokens": ["", "NaN", "nan", "NA"],
    "max_missing_fraction": 0.05,
    "constant_tolerance": 1e-8,
    "months_per_year": 12,
}

# Similarity estimators
SIMILARITY_CONFIG = {
    "ksg_k": 5,
    "bins_per_sample": 5,           # bins = floor(n / 5)
    "ksg_jitter": 1e-10,
    "ksg_dense_limit": 1000,        # use the dense pair path up to this n
    "mi_chunk": 16,
}

# Surrogates, resampling, null models
SURROGATE_CONFIG = {
    "iaaft_max_iter": 100,
    "iaaft_tol": 1e-8,
    "iaaft_spectrum_tol": 1e-3,
    "geomodel_eps": 0.05,
    "swaps_per_edge": 10,
    "max_swaps": 10_000_000,
    "quantile_levels": (0.9, 0.95, 0.99, 0.999),
}

# Network construction
NETWORK_CONFIG = {
    "degenerate_sigma": 1e-12,
}

# Link bundles
BUNDLE_CONFIG = {
    "eps": math.radians(5.0),
    "c": 0.8,
    "teleconnection_length": 0.25 * math.pi,
}

# Experiment runner
LAB_CONFIG = {
    "repetitions": 10,
    "band": (0.025, 0.975),
    "mad_shuffles": 100,
    "mad_eps": math.radians(10.0),
    "decorrelation_thresholds": (0.2, 0.5),
    "decorrelation_c": 0.8,
    "length_bins": 36,
}
