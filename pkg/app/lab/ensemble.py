"""
Ensemble Pipeline - Network dari resample data bersama di semua grid point
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional
import logging

import numpy as np
import pandas as pd
from tqdm import tqdm

from app.config import THREADS
from app.exceptions import InvalidArgumentError
from app.field.dataset import Dataset
from app.grid.sphere_grid import distance_matrix
from app.lab.construction import ConstructionSpec
from app.network.graph import Network
from app.seeds import derive_seed
from app.surrogates.resampling import block_bootstrap_indices, resample_dataset, subsample_windows

logger = logging.getLogger(__name__)

ENSEMBLE_SCHEMES = ("block_bootstrap", "subsample")


@dataclass
class EnsembleResult:
    """Member network plus frekuensi kemunculan tiap edge"""

    members: List[Network]
    frequencies: np.ndarray
    construction: ConstructionSpec
    scheme: str
    metadata: Dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return len(self.members)

    def stable_network(self, cutoff: float = 1.0) -> Network:
        """Network berisi edge dengan frekuensi >= cutoff"""
        if not 0.0 < cutoff <= 1.0:
            raise InvalidArgumentError(f"cutoff must lie in (0, 1], got {cutoff}")
        adjacency = (self.frequencies >= cutoff - 1e-12).astype(float)
        np.fill_diagonal(adjacency, 0.0)
        grid = self.members[0].grid
        return Network(adjacency=adjacency, grid=grid, metadata={"stable_cutoff": cutoff, "members": self.m})

    def unstable_fraction(self) -> float:
        """Fraksi edge (yang muncul minimal sekali) dengan frekuensi < 1"""
        iu = np.triu_indices(self.frequencies.shape[0], k=1)
        seen = self.frequencies[iu] > 0
        if not seen.any():
            return 0.0
        return float((self.frequencies[iu][seen] < 1.0).sum() / seen.sum())

    def edge_table(self) -> pd.DataFrame:
        """Edge yang muncul minimal sekali: i, j, frequency, length"""
        i, j = np.nonzero(np.triu(self.frequencies > 0, k=1))
        frame = pd.DataFrame({"i": i, "j": j, "frequency": self.frequencies[i, j]})
        grid = self.members[0].grid
        if grid is not None:
            frame["length"] = distance_matrix(grid)[i, j]
        return frame


def _member_indices(n: int, m: int, scheme: str, seed: int, block_len, window, stride) -> List[np.ndarray]:
    if scheme == "block_bootstrap":
        return [block_bootstrap_indices(n, block_len, derive_seed(seed, r, "ensemble:block")) for r in range(m)]
    if scheme == "subsample":
        if window is None:
            raise InvalidArgumentError("subsample ensemble needs a window length")
        if window > n:
            raise InvalidArgumentError(f"window {window} exceeds series length {n}")
        windows = subsample_windows(n, window, stride, m)
        if len(windows) < m:
            logger.warning(f"Only {len(windows)} subsample windows available, requested {m}")
        return windows
    raise InvalidArgumentError(f"Unknown ensemble scheme '{scheme}', expected one of {ENSEMBLE_SCHEMES}")


def ensemble_pipeline(
    data: Dataset,
    construction: ConstructionSpec,
    m: int,
    scheme: str = "block_bootstrap",
    block_len: Optional[int] = None,
    window: Optional[int] = None,
    stride: Optional[int] = None,
    seed: int = 0,
    threads: Optional[int] = None,
) -> EnsembleResult:
    """
    Bangun ensemble network dari resample data

    Args:
        data: Dataset
        construction: ConstructionSpec yang sama untuk semua member
        m: Jumlah member (>= 2)
        scheme: block_bootstrap | subsample
        block_len: Panjang block bootstrap
        window: Panjang window subsample
        stride: Langkah window subsample
        seed: Master seed
        threads: Worker thread

    Returns:
        EnsembleResult dengan frekuensi edge per pasangan node
    """
    if m < 2:
        raise InvalidArgumentError(f"ensemble needs m >= 2, got {m}")
    member_indices = _member_indices(data.n, m, scheme, seed, block_len, window, stride)
    if len(member_indices) < 2:
        raise InvalidArgumentError("ensemble needs at least two distinct members")

    def build(r: int) -> Network:
        resampled = resample_dataset(data, member_indices[r])
        _, net = construction.build(resampled, seed=derive_seed(seed, r, "ensemble:construct"))
        net.metadata["member"] = r
        return net

    with ThreadPoolExecutor(max_workers=threads or THREADS) as pool:
        members = list(tqdm(pool.map(build, range(len(member_indices))), total=len(member_indices),
                            desc="Ensemble members", disable=None, leave=False))

    frequencies = np.mean([net.adjacency > 0 for net in members], axis=0)
    result = EnsembleResult(
        members=members,
        frequencies=frequencies,
        construction=construction,
        scheme=scheme,
        metadata={"seed": seed, "block_len": block_len, "window": window, "stride": stride},
    )
    logger.info(f"Ensemble of {result.m} members: {result.unstable_fraction():.1%} of edges unstable")
    return result
