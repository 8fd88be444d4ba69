"""Plug-in (maximum-likelihood) entropy and mutual information estimators.

All values are in bits. Several discretized columns are turned into a single
discrete variable by enumerating the tuples actually observed, so memory stays
bounded by the number of rows whatever the number of columns.
"""
import math
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from models.errors import LengthMismatch

_STATE_LIMIT = 2 ** 62

InfoValue = float


class JointStateColumn(BaseModel):
    """One discrete variable: dense codes 0..cardinality-1 over n rows."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    codes: np.ndarray
    cardinality: int

    @field_validator("codes", mode="before")
    @classmethod
    def _as_codes(cls, value):
        codes = np.array(value, dtype=np.int64, copy=True).reshape(-1)
        codes.setflags(write=False)
        return codes

    @model_validator(mode="after")
    def _check_cardinality(self):
        if self.codes.size == 0:
            if self.cardinality != 0:
                raise ValueError("an empty column has cardinality 0")
            return self
        if self.codes.min() < 0 or self.codes.max() >= self.cardinality:
            raise ValueError("codes must lie in [0, cardinality)")
        if self.cardinality > self.codes.size:
            raise ValueError("cardinality cannot exceed the number of rows")
        return self

    @property
    def n(self) -> int:
        return int(self.codes.size)


ColumnLike = Union[JointStateColumn, np.ndarray, Sequence[int]]


def _first_appearance(values: np.ndarray):
    if values.size == 0:
        return np.zeros(0, dtype=np.int64), 0
    uniq, first, inverse = np.unique(values, return_index=True, return_inverse=True)
    rank = np.empty(uniq.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(uniq.size, dtype=np.int64)
    return rank[inverse.reshape(-1)], int(uniq.size)


def _split_columns(columns) -> List[np.ndarray]:
    if isinstance(columns, JointStateColumn):
        return [columns.codes]
    if isinstance(columns, np.ndarray):
        if columns.ndim == 1:
            return [columns.astype(np.int64, copy=False)]
        if columns.ndim == 2:
            return [columns[:, j].astype(np.int64, copy=False) for j in range(columns.shape[1])]
        raise ValueError("columns must be a 1-D or 2-D array")
    columns = list(columns)
    if columns and not isinstance(columns[0], JointStateColumn) and np.ndim(columns[0]) == 0:
        # a flat sequence of values is a single column
        return [np.asarray(columns, dtype=np.int64)]
    result = []
    for column in columns:
        if isinstance(column, JointStateColumn):
            result.append(column.codes)
        else:
            array = np.asarray(column)
            if array.ndim == 2:
                result.extend(_split_columns(array))
            else:
                result.append(array.astype(np.int64, copy=False).reshape(-1))
    return result


def _encode(columns: List[np.ndarray]):
    n = columns[0].size
    for column in columns[1:]:
        if column.size != n:
            raise LengthMismatch(f"columns have {n} and {column.size} rows")
    if n == 0:
        return np.zeros(0, dtype=np.int64), 0
    acc = np.zeros(n, dtype=np.int64)
    span = 1
    for column in columns:
        low = int(column.min())
        width = int(column.max()) - low + 1
        if span * width >= _STATE_LIMIT:
            acc, span = _first_appearance(acc)
        acc = acc * width + (column - low)
        span *= width
    return _first_appearance(acc)


def joint_encode(columns) -> JointStateColumn:
    """Map each distinct row tuple to a dense code, in order of first appearance.

    `columns` may be a 2-D (n, k) array, a single column, or a sequence of
    columns / JointStateColumns of equal length.
    """
    parts = _split_columns(columns)
    if not parts:
        raise ValueError("joint_encode needs at least one column")
    codes, cardinality = _encode(parts)
    return JointStateColumn(codes=codes, cardinality=cardinality)


def _coerce(column: ColumnLike) -> JointStateColumn:
    if isinstance(column, JointStateColumn):
        return column
    return joint_encode(column)


def _entropy_of_values(values: np.ndarray, bias_correction: bool = False) -> float:
    n = values.size
    if n == 0:
        return 0.0
    _, counts = np.unique(values, return_counts=True)
    # Summing sorted probabilities makes H depend only on the count multiset.
    counts = np.sort(counts)
    q = counts / n
    h = float(-np.sum(q * np.log2(q)))
    if bias_correction:
        h += (counts.size - 1) / (2.0 * n * math.log(2.0))
    return h if h > 0.0 else 0.0


def _pair_values(a: JointStateColumn, b: JointStateColumn) -> np.ndarray:
    if a.n != b.n:
        raise LengthMismatch(f"columns have {a.n} and {b.n} rows")
    return a.codes * max(b.cardinality, 1) + b.codes


def entropy(x: ColumnLike, bias_correction: bool = False) -> InfoValue:
    """H(x) = -sum q_s log2 q_s over the empirical state frequencies."""
    return _entropy_of_values(_coerce(x).codes, bias_correction)


def joint_entropy(*columns: ColumnLike, bias_correction: bool = False) -> InfoValue:
    return _entropy_of_values(joint_encode(list(columns)).codes, bias_correction)


def _mi_from_entropies(h_u: float, h_y: float, h_uy: float) -> float:
    # Exact Theorem-1 limits: y a function of u (or u of y) on the sample.
    if h_uy == h_u and h_uy == h_y:
        return h_u
    if h_uy == h_u:
        return h_y
    if h_uy == h_y:
        return h_u
    value = (h_u + h_y) - h_uy
    return min(max(value, 0.0), min(h_u, h_y))


def mutual_information(u: ColumnLike, y: ColumnLike, bias_correction: bool = False) -> InfoValue:
    """I(u; y) = H(u) + H(y) - H(u, y), symmetric and clamped to [0, min(H(u), H(y))]."""
    u, y = _coerce(u), _coerce(y)
    h_uy = _entropy_of_values(_pair_values(u, y), bias_correction)
    h_u = _entropy_of_values(u.codes, bias_correction)
    h_y = _entropy_of_values(y.codes, bias_correction)
    return _mi_from_entropies(h_u, h_y, h_uy)


def conditional_entropy(y: ColumnLike, u: ColumnLike, bias_correction: bool = False) -> InfoValue:
    """H(y | u) = H(y, u) - H(u); zero exactly when y is a function of u."""
    y, u = _coerce(y), _coerce(u)
    h_yu = _entropy_of_values(_pair_values(y, u), bias_correction)
    h_u = _entropy_of_values(u.codes, bias_correction)
    if h_yu == h_u:
        return 0.0
    h_y = _entropy_of_values(y.codes, bias_correction)
    return min(max(h_yu - h_u, 0.0), h_y)


def conditional_mi(
    x: ColumnLike,
    y: ColumnLike,
    u: Optional[Union[ColumnLike, Sequence[ColumnLike]]] = None,
    bias_correction: bool = False,
) -> InfoValue:
    """I(x; y | u) = I({x} + u; y) - I(u; y). An empty or missing u gives I(x; y)."""
    x, y = _coerce(x), _coerce(y)
    if u is None or (isinstance(u, (list, tuple)) and len(u) == 0):
        return mutual_information(x, y, bias_correction)
    u = _coerce(u) if not isinstance(u, (list, tuple)) else joint_encode(list(u))
    if u.n != x.n:
        raise LengthMismatch(f"columns have {x.n} and {u.n} rows")
    xu = joint_encode([x, u])
    value = mutual_information(xu, y, bias_correction) - mutual_information(u, y, bias_correction)
    return value if value > 0.0 else 0.0


def relative_information_gap(information: float, label_entropy: float) -> float:
    """|I(U;y) - H(y)| / I(U;y), +inf when I(U;y) is zero."""
    if information <= 0.0:
        return math.inf
    return abs(information - label_entropy) / information
