"""Errors raised by the stgsvd package."""

from __future__ import annotations

from typing import Optional


class GsvdError(Exception):
    """Base class for all stgsvd errors."""


class ConfigError(GsvdError, ValueError):
    """Invalid parameters, with the offending field attached."""

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class DimensionError(GsvdError, ValueError):
    """Operand shapes do not agree."""


class NotSymmetricError(GsvdError, ValueError):
    """A weight matrix fails the symmetry check."""


class NotPositiveDefiniteError(GsvdError):
    """Cholesky factorization broke down at a pivot."""

    def __init__(self, message: str, pivot: Optional[int] = None) -> None:
        super().__init__(message)
        self.pivot = pivot  # zero-based index of the failing pivot


class RankDeficiencyError(GsvdError):
    """A sketch or Gram matrix is numerically rank deficient."""

    def __init__(
        self,
        message: str,
        column: Optional[int] = None,
        iteration: Optional[int] = None,
    ) -> None:
        super().__init__(message)
        self.column = column  # zero-based failing column
        self.iteration = iteration  # subspace iteration, None outside the loop


class AssumptionViolationError(GsvdError):
    """The sketch does not capture the dominant subspace (rank(Omega_1) < k)."""


class OracleSizeError(GsvdError):
    """The dense oracle refuses inputs above its size cap."""


class NumericalFailure(GsvdError):
    """A computation produced non-finite values, or scheduled tasks failed."""
