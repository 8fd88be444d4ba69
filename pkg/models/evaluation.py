from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_serializer, field_validator

from models.selection import RankedSelection, SelectionResult, serialize_info
from utils.config import config


class ClassifierKind(str, Enum):
    GAUSSIAN_POOLED = "gaussian_pooled"
    GAUSSIAN_DIAGONAL = "gaussian_diagonal"
    KNN = "knn"


# Command-line names of the classifiers, in report order.
CLASSIFIER_ALIASES = {
    "nb-pooled": ClassifierKind.GAUSSIAN_POOLED,
    "nb-diag": ClassifierKind.GAUSSIAN_DIAGONAL,
    "knn": ClassifierKind.KNN,
}


class ClassifierSpec(BaseModel):
    kind: ClassifierKind
    k_neighbors: int = Field(default_factory=lambda: config.KNN_NEIGHBORS, ge=1)

    @property
    def label(self) -> str:
        if self.kind == ClassifierKind.KNN:
            return f"knn(k={self.k_neighbors})"
        return self.kind.value


class MetricRecord(BaseModel):
    method: str
    classifier: ClassifierSpec
    mce: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    evaluable: bool = True
    note: Optional[str] = None
    delta_ir: float
    delta_t: float
    cardinality: int = Field(ge=0)

    @field_serializer("delta_ir")
    def _dump_delta_ir(self, value: float):
        return serialize_info(value)

    @field_validator("delta_ir", mode="before")
    @classmethod
    def _load_delta_ir(cls, value):
        if value == "inf":
            return float("inf")
        return value


class SweepPoint(BaseModel):
    k: int
    mce: Optional[float] = None
    delta_ir: float
    mutual_information: float


class RunManifest(BaseModel):
    """Everything needed to repeat a run (wall-clock fields aside)."""
    command: List[str]
    config: Dict[str, Any]
    seed: int
    dataset_path: Optional[str] = None
    dataset_sha256: Optional[str] = None
    tool_version: str = Field(default_factory=lambda: config.TOOL_VERSION)
    started_at: datetime = Field(default_factory=datetime.now)
    finished_at: Optional[datetime] = None


class BenchmarkReport(BaseModel):
    dataset: str
    seed: int
    cardinality: int = 0
    records: List[MetricRecord] = Field(default_factory=list)
    selections: List[RankedSelection] = Field(default_factory=list)
    ce: Optional[SelectionResult] = None
    mrmr_variant: str = "difference"
    manifest: Optional[RunManifest] = None

    def to_json_dict(self) -> Dict[str, Any]:
        payload = self.model_dump(mode="json", exclude={"ce", "manifest"})
        payload["ce"] = self.ce.to_json_dict() if self.ce is not None else None
        payload["manifest"] = self.manifest.model_dump(mode="json") if self.manifest else None
        return payload
