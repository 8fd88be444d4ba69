import math
from enum import Enum
from typing import Dict, List, Optional

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from utils.config import config

# A binary vector z of length m; z_i = 1 selects column i.
Mask = npt.NDArray[np.uint8]


def as_mask(bits) -> Mask:
    return np.asarray(bits, dtype=np.uint8)


def serialize_info(value: Optional[float]):
    """JSON has no infinity; +inf travels as the string "inf"."""
    if value is None:
        return None
    if math.isinf(value):
        return "inf"
    return float(value)


class ExtractPolicy(str, Enum):
    THRESHOLD = "threshold"
    SAMPLE = "sample"


class BernoulliModel(BaseModel):
    """Independent Bernoulli probabilities p_i, one per feature, in feature order."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: np.ndarray

    @field_validator("p", mode="before")
    @classmethod
    def _as_probabilities(cls, value):
        p = np.array(value, dtype=np.float64, copy=True)
        if p.ndim != 1:
            raise ValueError("p must be a 1-D vector")
        if np.any(~np.isfinite(p)) or np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("every p_i must lie in [0, 1]")
        p.setflags(write=False)
        return p

    @classmethod
    def uniform(cls, m: int, p_init: float = 0.5) -> "BernoulliModel":
        return cls(p=np.full(m, p_init))

    @property
    def m(self) -> int:
        return int(self.p.shape[0])

    @field_serializer("p")
    def _dump_p(self, p: np.ndarray) -> List[float]:
        return [float(v) for v in p]


class CEConfig(BaseModel):
    """Parameters of the cross-entropy search.

    `s_min` defaults to m and `s_max` to 20 * s_min when left unset; both are
    resolved against the dataset at run time.
    """
    s_min: Optional[int] = Field(default=None, ge=1)
    s_max: Optional[int] = Field(default=None, ge=1)
    rho_coefficient: float = Field(default_factory=lambda: config.RHO_COEFFICIENT, gt=0.0)
    epsilon: float = Field(default_factory=lambda: config.EPSILON, gt=0.0)
    d: int = Field(default_factory=lambda: config.LAG, ge=1)
    max_iters: int = Field(default_factory=lambda: config.MAX_ITERS, ge=1)
    seed: int = Field(default_factory=lambda: config.SEED)
    smoothing_alpha: float = Field(default_factory=lambda: config.SMOOTHING_ALPHA, gt=0.0, le=1.0)
    p_init: float = Field(default_factory=lambda: config.P_INIT, gt=0.0, lt=1.0)
    extract_policy: ExtractPolicy = ExtractPolicy.THRESHOLD
    adaptive_s: bool = True
    size_penalty: float = Field(default_factory=lambda: config.SIZE_PENALTY, ge=0.0)
    bias_correction: bool = False
    n_jobs: int = Field(default_factory=lambda: config.N_JOBS, ge=1)

    @model_validator(mode="after")
    def _check_sizes(self):
        if self.s_min is not None and self.s_max is not None and self.s_min > self.s_max:
            raise ValueError(f"s_min ({self.s_min}) must not exceed s_max ({self.s_max})")
        return self

    def resolve_sizes(self, m: int):
        s_min = self.s_min or m
        s_max = self.s_max or 20 * s_min
        return s_min, max(s_min, s_max)


class SelectionResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    final_p: BernoulliModel
    mask: List[int]
    selected_indices: List[int]
    selected_names: List[str]
    gamma_trace: List[float]
    sample_size_trace: List[int] = Field(default_factory=list)
    iterations: int
    objective: float
    entropy_y: float
    delta_ir: float
    elapsed: float
    converged: bool

    @property
    def cardinality(self) -> int:
        return len(self.selected_indices)

    def to_json_dict(self) -> Dict:
        """The documented SelectionResult JSON object."""
        return {
            "selected_indices": list(self.selected_indices),
            "selected_names": list(self.selected_names),
            "final_p": [float(v) for v in self.final_p.p],
            "gamma_trace": [float(g) for g in self.gamma_trace],
            "iterations": self.iterations,
            "objective_bits": float(self.objective),
            "entropy_y_bits": float(self.entropy_y),
            "delta_ir": serialize_info(self.delta_ir),
            "elapsed_seconds": float(self.elapsed),
            "converged": self.converged,
        }


class RankedSelection(BaseModel):
    method: str
    order: List[int]
    criterion_values: List[float]

    @model_validator(mode="after")
    def _check_order(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError("selected indices must be unique")
        if len(self.criterion_values) != len(self.order):
            raise ValueError("one criterion value per selected index is required")
        return self

    def prefix(self, k: int) -> List[int]:
        return list(self.order[:k])
