"""Operators derived from other operators."""

from __future__ import annotations

import numpy as np

from ..exceptions import DimensionError
from ..operator_interface import DenseMatrix, LinearOp, SpdOp


class TransposedOperator(LinearOp):
    """A^T as a LinearOp; products are counted on both this view and A."""

    def __init__(self, inner: LinearOp) -> None:
        super().__init__(inner.shape[1], inner.shape[0])
        self._inner = inner

    @property
    def inner(self) -> LinearOp:
        """Return the wrapped operator."""
        return self._inner

    def _apply(self, x: DenseMatrix) -> DenseMatrix:
        return self._inner.apply_transpose(x)

    def _apply_transpose(self, y: DenseMatrix) -> DenseMatrix:
        return self._inner.apply(y)


class InverseSpdOperator(SpdOp):
    """W^{-1} as an SpdOp: apply is W.solve and solve is W.apply."""

    def __init__(self, inner: SpdOp) -> None:
        super().__init__(inner.n)
        self._inner = inner

    @property
    def inner(self) -> SpdOp:
        """Return the wrapped operator."""
        return self._inner

    def _apply(self, x: DenseMatrix) -> DenseMatrix:
        return self._inner.solve(x)

    def _solve(self, x: DenseMatrix) -> DenseMatrix:
        return self._inner.apply(x)


def invert(weight: SpdOp) -> SpdOp:
    """Return an SpdOp for W^{-1}, unwrapping a double inverse."""
    if isinstance(weight, InverseSpdOperator):
        return weight.inner
    return InverseSpdOperator(weight)


class LowRankOperator(LinearOp):
    """U diag(sigma) V^T T applied without forming the product.

    A rank-0 factorization is the zero operator.
    """

    def __init__(
        self, U: DenseMatrix, sigma: DenseMatrix, V: DenseMatrix, T: SpdOp
    ) -> None:
        U = np.asarray(U, dtype=np.float64)
        V = np.asarray(V, dtype=np.float64)
        sigma = np.asarray(sigma, dtype=np.float64)
        rank = sigma.shape[0]
        if U.shape[1] != rank or V.shape[1] != rank or V.shape[0] != T.n:
            raise DimensionError(
                f"inconsistent factors: U {U.shape}, sigma {sigma.shape}, "
                f"V {V.shape}, T {T.n}x{T.n}"
            )
        super().__init__(U.shape[0], V.shape[0])
        self._U, self._sigma, self._V, self._T = U, sigma, V, T

    def _apply(self, x: DenseMatrix) -> DenseMatrix:
        return self._U @ (self._sigma * (self._V.T @ self._T.apply(x)))

    def _apply_transpose(self, y: DenseMatrix) -> DenseMatrix:
        return self._T.apply(self._V @ (self._sigma * (self._U.T @ y)))
