"""Exceptions raised by the cefs services."""
from typing import Optional


class CefsError(Exception):
    """Base class for every error the toolkit raises on purpose."""


class DataError(CefsError):
    pass


class ParseError(DataError):
    def __init__(self, row: int, column: str, value: Optional[str] = None):
        self.row = row
        self.column = column
        self.value = value
        detail = f" (value {value!r})" if value is not None else ""
        super().__init__(f"Could not parse a number at row {row}, column {column!r}{detail}")


class EmptyDataset(DataError):
    pass


class LabelColumnMissing(DataError):
    pass


class InvalidFraction(DataError):
    pass


class LengthMismatch(CefsError):
    pass


class EmptyElite(CefsError):
    pass


class InvalidK(CefsError):
    pass


class SingularCovariance(CefsError):
    """Pooled covariance of the selected columns cannot be inverted."""


class InsufficientClasses(CefsError):
    pass


class EmptyTestSet(CefsError):
    pass
