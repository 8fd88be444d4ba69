from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from utils.config import config


class ColumnKind(str, Enum):
    BINARY = "binary"
    INTEGER = "integer"
    REAL = "real"


def infer_kind(values: np.ndarray, max_levels: Optional[int] = None) -> ColumnKind:
    """Tag a numeric column as binary, integer (few levels) or real."""
    max_levels = max_levels or config.INTEGER_MAX_LEVELS
    if values.size == 0:
        return ColumnKind.REAL
    distinct = np.unique(values)
    if np.all(np.isin(distinct, (0.0, 1.0))):
        return ColumnKind.BINARY
    if np.all(distinct == np.round(distinct)) and distinct.size <= max_levels:
        return ColumnKind.INTEGER
    return ColumnKind.REAL


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


class Dataset(BaseModel):
    """Sample matrix X (n rows, m named columns) plus the class attribute y.

    Instances are immutable; the arrays are stored read-only.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    feature_names: List[str]
    features: np.ndarray
    label: np.ndarray
    column_kinds: List[ColumnKind]
    label_kind: ColumnKind
    dropped_rows: int = 0

    @field_validator("features", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        array = np.asarray(value, dtype=np.float64)
        if array.ndim == 1 and array.size == 0:
            array = array.reshape(0, 0)
        if array.ndim != 2:
            raise ValueError("features must be a 2-D array (n rows, m columns)")
        return _readonly(array)

    @field_validator("label", mode="before")
    @classmethod
    def _as_vector(cls, value):
        array = np.asarray(value, dtype=np.float64)
        if array.ndim != 1:
            raise ValueError("label must be a 1-D array")
        return _readonly(array)

    @model_validator(mode="after")
    def _check_consistency(self):
        n, m = self.features.shape
        if self.label.shape[0] != n:
            raise ValueError(f"label has {self.label.shape[0]} rows, features have {n}")
        if len(self.feature_names) != m:
            raise ValueError(f"{len(self.feature_names)} names for {m} columns")
        if len(set(self.feature_names)) != m:
            raise ValueError("column names must be unique")
        if len(self.column_kinds) != m:
            raise ValueError(f"{len(self.column_kinds)} kinds for {m} columns")
        for j, kind in enumerate(self.column_kinds):
            if kind == ColumnKind.BINARY and not np.all(np.isin(self.features[:, j], (0.0, 1.0))):
                raise ValueError(f"column {self.feature_names[j]!r} is tagged binary but holds other values")
        if self.label_kind == ColumnKind.BINARY and not np.all(np.isin(self.label, (0.0, 1.0))):
            raise ValueError("label is tagged binary but holds other values")
        return self

    @property
    def n(self) -> int:
        return int(self.label.shape[0])

    @property
    def m(self) -> int:
        return int(self.features.shape[1])

    def take(self, rows: Sequence[int]) -> "Dataset":
        """Row subset keeping names and kinds."""
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            name=self.name,
            feature_names=list(self.feature_names),
            features=self.features[rows].reshape(rows.size, self.m),
            label=self.label[rows],
            column_kinds=list(self.column_kinds),
            label_kind=self.label_kind,
        )

    def with_label(self, label: np.ndarray, kind: ColumnKind = ColumnKind.INTEGER) -> "Dataset":
        return Dataset(
            name=self.name,
            feature_names=list(self.feature_names),
            features=self.features,
            label=label,
            column_kinds=list(self.column_kinds),
            label_kind=kind,
            dropped_rows=self.dropped_rows,
        )


class DiscretizedDataset(BaseModel):
    """Integer-coded columns ready for plug-in entropy estimation.

    `bin_edges[j]` holds the inner cut points of a real column (values equal
    to a cut point fall in the lower bin) and is None for binary/integer
    columns, whose sorted distinct values are kept in `levels[j]` instead.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    feature_names: List[str]
    codes: np.ndarray
    label_codes: np.ndarray
    bin_counts: List[int]
    label_classes: int
    bin_edges: List[Optional[List[float]]]
    levels: List[Optional[List[float]]]
    label_edges: Optional[List[float]] = None
    label_levels: Optional[List[float]] = None

    @field_validator("codes", "label_codes", mode="before")
    @classmethod
    def _as_codes(cls, value):
        return _readonly(np.asarray(value, dtype=np.int64))

    @model_validator(mode="after")
    def _check_codes(self):
        if self.codes.ndim != 2 or self.codes.shape[0] != self.label_codes.shape[0]:
            raise ValueError("codes must be (n, m) with one label code per row")
        if len(self.bin_counts) != self.codes.shape[1]:
            raise ValueError("one bin count per column is required")
        for j, count in enumerate(self.bin_counts):
            column = self.codes[:, j]
            if column.size and (column.min() < 0 or column.max() >= count):
                raise ValueError(f"codes of column {self.feature_names[j]!r} exceed its bin count {count}")
        if self.label_classes < 1:
            raise ValueError("at least one label class is required")
        if np.unique(self.label_codes).size != self.label_classes:
            raise ValueError("label_classes must equal the number of distinct label codes")
        return self

    @property
    def n(self) -> int:
        return int(self.codes.shape[0])

    @property
    def m(self) -> int:
        return int(self.codes.shape[1])


class SplitSpec(BaseModel):
    train_fraction: float = Field(default_factory=lambda: config.TRAIN_FRACTION)
    seed: int = Field(default_factory=lambda: config.SEED)
    stratified: bool = True
