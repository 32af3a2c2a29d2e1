"""Cholesky helpers that report the failing pivot instead of a bare LinAlgError."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt
from scipy.linalg import lapack

from .exceptions import NotPositiveDefiniteError

DenseMatrix = npt.NDArray[np.float64]


def potrf(matrix: DenseMatrix, lower: bool) -> tuple[DenseMatrix, int]:
    """Run LAPACK dpotrf on a copy of ``matrix``.

    Returns:
        The triangular factor (other triangle zeroed) and LAPACK's ``info``:
        0 on success, ``j > 0`` when the leading minor of order ``j`` is not
        positive definite.
    """
    factor, info = lapack.dpotrf(
        np.array(matrix, dtype=np.float64, order="F"), lower=int(lower), clean=1
    )
    if info < 0:
        raise ValueError(f"dpotrf rejected argument {-info}")
    return factor, int(info)


def cholesky_lower(matrix: DenseMatrix, what: str = "matrix") -> DenseMatrix:
    """Return L with ``matrix = L L^T``.

    Raises:
        NotPositiveDefiniteError: Carrying the zero-based failing pivot
    """
    factor, info = potrf(matrix, lower=True)
    if info > 0:
        raise NotPositiveDefiniteError(
            f"{what} is not positive definite (pivot {info - 1})", pivot=info - 1
        )
    if not np.all(np.isfinite(factor)):
        raise NotPositiveDefiniteError(f"{what} produced a non-finite Cholesky factor")
    return factor
