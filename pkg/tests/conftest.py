"""
Shared fixtures: grid kecil, dataset simulasi, random graph
"""

import numpy as np
import pytest

from app.field import FieldSpec, MaternParams, simulate
from app.grid import fekete_grid, gaussian_grid
from app.network import Network


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="need --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def coarse_grid():
    """Gaussian grid 30 derajat: 6 x 12 = 72 node"""
    return gaussian_grid(30.0)


@pytest.fixture(scope="session")
def fekete_small():
    return fekete_grid(120, iterations=100, seed=0)


@pytest.fixture(scope="session")
def smooth_params():
    return MaternParams(nu=1.5, ell=0.3)


@pytest.fixture
def coarse_dataset(coarse_grid, smooth_params):
    return simulate(coarse_grid, FieldSpec(matern=smooth_params), n=120, seed=7)


def random_network(p: int, probability: float, seed: int, grid=None) -> Network:
    """Erdos-Renyi network unweighted"""
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((p, p)) < probability, k=1)
    adjacency = (upper | upper.T).astype(float)
    return Network(adjacency=adjacency, grid=grid)


@pytest.fixture
def registry(tmp_path):
    from app.database import configure_database

    configure_database(f"sqlite:///{tmp_path / 'registry.db'}")
    yield tmp_path / "registry.db"
    configure_database(None)
