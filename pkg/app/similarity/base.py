"""
Similarity Matrix - Tipe hasil estimasi dan format file
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union
import json
import logging

import numpy as np
import pandas as pd

from app.exceptions import FormatError, InvalidArgumentError

logger = logging.getLogger(__name__)

ESTIMATORS = ("pearson_empirical", "spearman", "ledoit_wolf", "mi_binned", "mi_ksg", "ground_truth")
CORRELATION_ESTIMATORS = ("pearson_empirical", "spearman", "ledoit_wolf", "ground_truth")

PathLike = Union[str, Path]


@dataclass
class SimilarityMatrix:
    """
    Symmetric p x p similarity estimate

    Diagonal disimpan tapi tidak pernah dipakai untuk edge.
    """

    entries: np.ndarray
    estimator: str
    n: Optional[int] = None
    flagged: Optional[np.ndarray] = None
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise InvalidArgumentError(f"Unknown estimator '{self.estimator}'")
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvalidArgumentError(f"similarity must be square, got {entries.shape}")
        self.entries = 0.5 * (entries + entries.T)
        if self.flagged is None:
            self.flagged = np.zeros(self.p, dtype=bool)
        else:
            self.flagged = np.asarray(self.flagged, dtype=bool)

    @property
    def p(self) -> int:
        return self.entries.shape[0]

    def upper_triangle(self) -> np.ndarray:
        """Off-diagonal values dalam urutan row-major (i < j)"""
        i, j = np.triu_indices(self.p, k=1)
        return self.entries[i, j]

    def edge_values(self) -> np.ndarray:
        """Copy entries dengan node yang di-flag bernilai -inf dan diagonal -inf"""
        values = self.entries.copy()
        values[self.flagged, :] = -np.inf
        values[:, self.flagged] = -np.inf
        np.fill_diagonal(values, -np.inf)
        return values

    def reporting_entries(self) -> np.ndarray:
        """Entries untuk laporan; estimasi MI negatif di-clip ke 0"""
        if self.estimator.startswith("mi_"):
            return np.maximum(self.entries, 0.0)
        return self.entries

    def to_csv(self, path: PathLike) -> Path:
        """Dense CSV tanpa header kolom"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(self.entries).to_csv(path, index=False, header=False, float_format="%.17g")
        return path

    def save_binary(self, path: PathLike) -> Path:
        """Header JSON + upper triangle float64"""
        header = {"estimator": self.estimator, "p": self.p, "n": self.n, "kind": "similarity"}
        return write_upper_triangles(path, header, [self.entries])


def write_upper_triangles(path: PathLike, header: Dict, matrices: List[np.ndarray]) -> Path:
    """
    Tulis satu atau lebih matrix simetris sebagai upper triangle (k=1)

    Format: satu baris JSON header, lalu float64 little-endian berurutan.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    p = header["p"]
    iu = np.triu_indices(p, k=1)
    header = {**header, "blocks": len(matrices)}
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for matrix in matrices:
            np.asarray(matrix, dtype="<f8")[iu].tofile(f)
    return path


def read_upper_triangles(path: PathLike) -> Tuple[Dict, List[np.ndarray]]:
    """Kebalikan dari write_upper_triangles; diagonal diisi 0"""
    try:
        with open(path, "rb") as f:
            header = json.loads(f.readline().decode("utf-8"))
            payload = np.frombuffer(f.read(), dtype="<f8")
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise FormatError(f"Cannot read upper-triangle file {path}: {e}") from e

    p, blocks = int(header["p"]), int(header.get("blocks", 1))
    size = p * (p - 1) // 2
    if payload.size != size * blocks:
        raise FormatError(f"{path}: expected {size * blocks} values, found {payload.size}")

    iu = np.triu_indices(p, k=1)
    matrices = []
    for b in range(blocks):
        matrix = np.zeros((p, p))
        matrix[iu] = payload[b * size:(b + 1) * size]
        matrices.append(matrix + matrix.T)
    return header, matrices


def load_similarity(path: PathLike, estimator: str = "pearson_empirical") -> SimilarityMatrix:
    """
    Load SimilarityMatrix dari dense CSV atau file binary

    Args:
        path: File .csv (dense) atau binary dengan header
        estimator: Tag untuk file CSV (binary membawa tag sendiri)
    """
    path = Path(path)
    if path.suffix == ".csv":
        try:
            entries = pd.read_csv(path, header=None, float_precision="round_trip").to_numpy(dtype=float)
        except (OSError, ValueError, pd.errors.ParserError) as e:
            raise FormatError(f"Cannot read similarity CSV {path}: {e}") from e
        if entries.shape[0] != entries.shape[1]:
            raise FormatError(f"Similarity CSV {path} is not square")
        return SimilarityMatrix(entries=entries, estimator=estimator)

    header, (entries,) = read_upper_triangles(path)
    diagonal = 1.0 if header["estimator"] in CORRELATION_ESTIMATORS else 0.0
    np.fill_diagonal(entries, diagonal)
    return SimilarityMatrix(entries=entries, estimator=header["estimator"], n=header.get("n"))
