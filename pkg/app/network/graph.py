"""
Network - Adjacency matrix simetris plus metadata konstruksi
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Set, Tuple, Union
import json
import logging

import networkx as nx
import numpy as np
import pandas as pd

from app.exceptions import FormatError, InvalidArgumentError
from app.grid.sphere_grid import SphereGrid

logger = logging.getLogger(__name__)


def to_jsonable(value):
    """Convert numpy scalar/array ke tipe JSON"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


@dataclass
class Network:
    """
    Undirected network pada p node

    Attributes:
        adjacency: Matriks p x p simetris, diagonal nol, bobot non-negatif
        grid: Grid referensi (opsional)
        weighted: False berarti entry di {0, 1}
        metadata: scheme, parameter, estimator, seed lineage
    """

    adjacency: np.ndarray
    grid: Optional[SphereGrid] = None
    weighted: bool = False
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        adjacency = np.asarray(self.adjacency, dtype=float)
        if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
            raise InvalidArgumentError(f"adjacency must be square, got {adjacency.shape}")
        if self.grid is not None and self.grid.size != adjacency.shape[0]:
            raise InvalidArgumentError("adjacency size does not match grid")
        if np.any(np.diag(adjacency) != 0):
            raise InvalidArgumentError("adjacency must have zero diagonal")
        if not np.array_equal(adjacency, adjacency.T):
            raise InvalidArgumentError("adjacency must be symmetric")
        if np.any(adjacency < 0) or not np.all(np.isfinite(adjacency)):
            raise InvalidArgumentError("adjacency entries must be finite and non-negative")
        if not self.weighted and not np.all((adjacency == 0) | (adjacency == 1)):
            raise InvalidArgumentError("unweighted adjacency must be binary")
        self.adjacency = adjacency

    @property
    def p(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """Edge (i, j) dengan i < j dalam urutan row-major"""
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return i, j

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.adjacency, k=1)))

    @property
    def density(self) -> float:
        possible = self.p * (self.p - 1) / 2
        return self.n_edges / possible if possible else 0.0

    def edge_set(self) -> Set[Tuple[int, int]]:
        i, j = self.edges()
        return set(zip(i.tolist(), j.tolist()))

    def edge_mask(self) -> np.ndarray:
        """Boolean upper-triangle (k=1) vector edge presence"""
        iu = np.triu_indices(self.p, k=1)
        return self.adjacency[iu] > 0

    def binarized(self) -> "Network":
        """Network unweighted dengan edge = weight > 0"""
        return replace(self, adjacency=(self.adjacency > 0).astype(float), weighted=False,
                       metadata={**self.metadata, "binarized": True})

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.p))
        i, j = self.edges()
        graph.add_weighted_edges_from(zip(i.tolist(), j.tolist(), self.adjacency[i, j].tolist()))
        return graph

    @classmethod
    def from_networkx(cls, graph: nx.Graph, grid: Optional[SphereGrid] = None,
                      metadata: Optional[Dict] = None) -> "Network":
        adjacency = nx.to_numpy_array(graph, nodelist=range(graph.number_of_nodes()), weight=None)
        return cls(adjacency=adjacency, grid=grid, weighted=False, metadata=metadata or {})

    def edge_list(self) -> pd.DataFrame:
        i, j = self.edges()
        return pd.DataFrame({"i": i, "j": j, "weight": self.adjacency[i, j]})

    def to_csv(self, path: Union[str, Path]) -> Path:
        """Edge list CSV `i,j,weight` plus sidecar `<path>.meta.json`"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.edge_list().to_csv(path, index=False, float_format="%.17g")
        sidecar = {"p": self.p, "weighted": self.weighted, "metadata": to_jsonable(self.metadata)}
        with open(_sidecar_path(path), "w", encoding="utf-8") as f:
            json.dump(sidecar, f, indent=2, sort_keys=True)
        return path


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def load_network(path: Union[str, Path], grid: Optional[SphereGrid] = None) -> Network:
    """Load network dari edge list CSV dan sidecar metadata"""
    path = Path(path)
    try:
        with open(_sidecar_path(path), encoding="utf-8") as f:
            sidecar = json.load(f)
        edges = pd.read_csv(path, float_precision="round_trip")
    except (OSError, json.JSONDecodeError, pd.errors.ParserError) as e:
        raise FormatError(f"Cannot read network {path}: {e}") from e

    if list(edges.columns) != ["i", "j", "weight"]:
        raise FormatError(f"Network file {path} must have columns i,j,weight")
    p = int(sidecar["p"])
    adjacency = np.zeros((p, p))
    i, j = edges["i"].to_numpy(int), edges["j"].to_numpy(int)
    adjacency[i, j] = edges["weight"].to_numpy(float)
    adjacency[j, i] = adjacency[i, j]
    return Network(adjacency=adjacency, grid=grid, weighted=bool(sidecar["weighted"]),
                   metadata=sidecar.get("metadata", {}))
