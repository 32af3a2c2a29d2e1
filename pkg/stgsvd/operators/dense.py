"""Dense in-memory operators."""

from __future__ import annotations

import logging

import numpy as np
import scipy.linalg

from ..const import SYMMETRY_TOL
from ..exceptions import DimensionError, NotSymmetricError
from ..factorizations import cholesky_lower
from ..operator_interface import DenseMatrix, LinearOp, SpdOp

_LOGGER = logging.getLogger(__name__)


def as_dense_matrix(matrix, what: str = "matrix") -> DenseMatrix:
    """Validate and return a C-ordered float64 copy of a 2-D array.

    Raises:
        DimensionError: If the array is not 2-D with positive dimensions
        ValueError: If it holds NaN or Inf
    """
    dense = np.array(matrix, dtype=np.float64, order="C")
    if dense.ndim != 2 or dense.shape[0] < 1 or dense.shape[1] < 1:
        raise DimensionError(f"{what} must be a non-empty 2-D array, got {dense.shape}")
    if not np.all(np.isfinite(dense)):
        raise ValueError(f"{what} contains non-finite entries")
    return dense


class DenseOperator(LinearOp):
    """LinearOp backed by a dense matrix."""

    def __init__(self, matrix) -> None:
        dense = as_dense_matrix(matrix)
        super().__init__(*dense.shape)
        self._matrix = dense

    @property
    def matrix(self) -> DenseMatrix:
        """Return the backing matrix (read-only view)."""
        view = self._matrix.view()
        view.flags.writeable = False
        return view

    def _apply(self, x: DenseMatrix) -> DenseMatrix:
        return self._matrix @ x

    def _apply_transpose(self, y: DenseMatrix) -> DenseMatrix:
        return self._matrix.T @ y

    def to_dense(self) -> DenseMatrix:
        return self._matrix.copy()


class DenseSpdOperator(SpdOp):
    """SpdOp backed by a dense symmetric positive definite matrix.

    The matrix is symmetrized and Cholesky factored on construction; solves
    reuse the factor.
    """

    def __init__(self, matrix) -> None:
        dense = as_dense_matrix(matrix, "weight")
        if dense.shape[0] != dense.shape[1]:
            raise DimensionError(f"weight must be square, got {dense.shape}")
        super().__init__(dense.shape[0])

        scale = np.linalg.norm(dense)
        asymmetry = np.linalg.norm(dense - dense.T)
        if asymmetry > SYMMETRY_TOL * scale:
            raise NotSymmetricError(
                f"weight is not symmetric: |W - W^T|_F = {asymmetry:.3e} "
                f"exceeds {SYMMETRY_TOL:g} |W|_F"
            )
        self._matrix = 0.5 * (dense + dense.T)
        self._cholesky = cholesky_lower(self._matrix, "weight")
        _LOGGER.debug("Factored %dx%d dense weight", self._n, self._n)

    @property
    def matrix(self) -> DenseMatrix:
        """Return the symmetrized backing matrix (read-only view)."""
        view = self._matrix.view()
        view.flags.writeable = False
        return view

    def _apply(self, x: DenseMatrix) -> DenseMatrix:
        return self._matrix @ x

    def _solve(self, x: DenseMatrix) -> DenseMatrix:
        return scipy.linalg.cho_solve((self._cholesky, True), x)

    def to_dense(self) -> DenseMatrix:
        return self._matrix.copy()

    def diagonal(self) -> DenseMatrix:
        return np.diag(self._matrix).copy()


def dense_adapter(matrix) -> DenseOperator:
    """Wrap a dense m x n matrix as a LinearOp."""
    return DenseOperator(matrix)


def spd_dense_adapter(matrix) -> DenseSpdOperator:
    """Wrap a dense SPD matrix as an SpdOp.

    Raises:
        NotSymmetricError: If the relative asymmetry exceeds 1e-12
        NotPositiveDefiniteError: If Cholesky fails, with the pivot index
    """
    return DenseSpdOperator(matrix)


def identity_weight(n: int) -> DenseSpdOperator:
    """Return the n x n identity as an SpdOp."""
    return DenseSpdOperator(np.eye(n))


def as_linear_op(operand) -> LinearOp:
    """Accept either a LinearOp or a dense array."""
    if isinstance(operand, LinearOp):
        return operand
    return DenseOperator(operand)


def as_spd_op(operand) -> SpdOp:
    """Accept either an SpdOp or a dense SPD array."""
    if isinstance(operand, SpdOp):
        return operand
    return DenseSpdOperator(operand)
