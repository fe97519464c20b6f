"""
Construction - Estimator + scheme + parameter sebagai satu unit
"""

from typing import Dict, Literal, Optional, Tuple
import logging

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.field.dataset import Dataset
from app.network.builder import SCHEMES, build_network
from app.network.graph import Network
from app.seeds import derive_seed
from app.similarity.base import SimilarityMatrix
from app.similarity.estimate import ESTIMATOR_FUNCTIONS, estimate_similarity
from app.surrogates.baseline import edge_baseline

logger = logging.getLogger(__name__)

SCHEME_PARAMETER = {
    "density": "density",
    "threshold": "tau",
    "knn": "k",
    "zscore": "density",
    "quantile": "level",
}


class ConstructionSpec(BaseModel):
    """
    Cara membangun network dari Dataset

    Attributes:
        estimator: Tag estimator similarity
        scheme: density | threshold | knn | zscore | quantile
        params: Parameter scheme (density / tau / k / level)
        weighted: Weighted network
        baseline_method: Surrogate untuk zscore / quantile
        baseline_m: Jumlah replicate surrogate
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    estimator: str = "pearson_empirical"
    scheme: str = "density"
    params: Dict[str, float] = Field(default_factory=dict)
    weighted: bool = False
    baseline_method: Literal["shuffle", "iaaft"] = "shuffle"
    baseline_m: int = Field(default=100, ge=2)

    @field_validator("estimator")
    @classmethod
    def _known_estimator(cls, value: str) -> str:
        if value not in ESTIMATOR_FUNCTIONS:
            raise ValueError(f"unknown estimator '{value}', expected one of {sorted(ESTIMATOR_FUNCTIONS)}")
        return value

    @field_validator("scheme")
    @classmethod
    def _known_scheme(cls, value: str) -> str:
        if value not in SCHEMES:
            raise ValueError(f"unknown scheme '{value}', expected one of {SCHEMES}")
        return value

    @model_validator(mode="after")
    def _scheme_parameter(self):
        name = SCHEME_PARAMETER[self.scheme]
        if name not in self.params:
            raise ValueError(f"scheme '{self.scheme}' needs parameter '{name}'")
        return self

    @property
    def parameter(self) -> Tuple[str, float]:
        name = SCHEME_PARAMETER[self.scheme]
        return name, self.params[name]

    @property
    def label(self) -> str:
        name, value = self.parameter
        weight = "_w" if self.weighted else ""
        return f"{self.estimator}_{self.scheme}{weight}_{name}{value:g}"

    @property
    def needs_baseline(self) -> bool:
        return self.scheme in ("zscore", "quantile")

    def estimate(self, data: Dataset, seed: int = 0) -> SimilarityMatrix:
        options = {"seed": seed} if self.estimator == "mi_ksg" else {}
        return estimate_similarity(data, self.estimator, **options)

    def build(
        self,
        data: Dataset,
        seed: int = 0,
        sim: Optional[SimilarityMatrix] = None,
        baseline=None,
    ) -> Tuple[SimilarityMatrix, Network]:
        """
        Estimasi (kalau sim belum ada) lalu bangun network

        Returns:
            Tuple (similarity, network)
        """
        if sim is None:
            sim = self.estimate(data, seed)
        params = dict(self.params)
        if self.scheme == "knn":
            params["k"] = int(params["k"])
        if self.needs_baseline:
            if baseline is None:
                baseline = edge_baseline(
                    data, self.estimator, self.baseline_method, self.baseline_m,
                    levels=[params["level"]] if "level" in params else None,
                    seed=derive_seed(seed, 0, f"baseline:{self.baseline_method}"), threads=1,
                )
            params["baseline"] = baseline
        net = build_network(sim, self.scheme, self.weighted, data.grid, **params)
        net.metadata["construction"] = self.label
        return sim, net
