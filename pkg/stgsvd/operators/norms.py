"""Weighted vector and operator norms."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from ..const import NEGATIVE_RADICAND_TOL
from ..exceptions import DimensionError, NotPositiveDefiniteError
from ..operator_interface import DenseMatrix, SpdOp
from .dense import as_linear_op, as_spd_op


def weighted_norm(x, W) -> float:
    """Return sqrt(x^T W x); costs one apply of W.

    Raises:
        NotPositiveDefiniteError: If x^T W x is negative beyond roundoff
    """
    weight = as_spd_op(W)
    vec = np.asarray(x, dtype=np.float64)
    value = float(vec @ weight.apply(vec))
    if value < -NEGATIVE_RADICAND_TOL * max(1.0, float(vec @ vec)):
        raise NotPositiveDefiniteError(
            f"x^T W x = {value:.3e} is negative; the weight is not positive definite"
        )
    return float(np.sqrt(max(value, 0.0)))


def _check_shapes(m: int, n: int, S: SpdOp, T: SpdOp) -> None:
    if S.n != m or T.n != n:
        raise DimensionError(
            f"weights {S.n}x{S.n} and {T.n}x{T.n} do not match a {m}x{n} operator"
        )


def weighted_transform(A, S, T) -> DenseMatrix:
    """Return L_S^T A L_T^{-T}, whose 2-norm is the (S,T) operator norm."""
    op = as_linear_op(A)
    left, right = as_spd_op(S), as_spd_op(T)
    _check_shapes(*op.shape, left, right)
    dense = op.to_dense()
    # A L_T^{-T} = (L_T^{-1} A^T)^T
    scaled = scipy.linalg.solve_triangular(right.cholesky(), dense.T, lower=True).T
    return left.cholesky().T @ scaled


def weighted_op_norm(A, S, T) -> float:
    """Return the (S,T)-weighted operator norm of A.

    Materializes A densely; S and T are used through their Cholesky factors.
    """
    transformed = weighted_transform(A, S, T)
    return float(scipy.linalg.svdvals(transformed)[0])


def _sqrtm_spd(matrix: DenseMatrix, inverse: bool = False) -> DenseMatrix:
    eigvals, eigvecs = scipy.linalg.eigh(matrix)
    eigvals = np.clip(eigvals, np.finfo(float).tiny, None)
    power = -0.5 if inverse else 0.5
    return (eigvecs * eigvals**power) @ eigvecs.T


def sqrt_transform(A, S, T) -> DenseMatrix:
    """Return S^{1/2} A T^{-1/2} built from symmetric eigendecompositions."""
    op = as_linear_op(A)
    left, right = as_spd_op(S), as_spd_op(T)
    _check_shapes(*op.shape, left, right)
    return (
        _sqrtm_spd(left.to_dense())
        @ op.to_dense()
        @ _sqrtm_spd(right.to_dense(), inverse=True)
    )


def weighted_op_norm_sqrt(A, S, T) -> float:
    """Return ||S^{1/2} A T^{-1/2}||_2, the square-root form of the same norm."""
    return float(scipy.linalg.svdvals(sqrt_transform(A, S, T))[0])
