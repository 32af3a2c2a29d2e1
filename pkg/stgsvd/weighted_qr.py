"""Weighted Cholesky QR with a Householder pre-factorization.

Given Z (m x n) and an SPD weight W, computes Z = Q R with Q^T W Q = I and R
upper triangular with a positive diagonal. Z is first factored as
Q_Z R_Z so that the Gram matrix whose Cholesky factor is taken has the
conditioning of W restricted to range(Z), not that of Z^T W Z.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .const import REFINE_THRESHOLD
from .exceptions import DimensionError, NumericalFailure, RankDeficiencyError
from .factorizations import potrf
from .operator_interface import DenseMatrix, SpdOp
from .operators.dense import as_spd_op

_LOGGER = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps


@dataclass
class WeightedQrResult:
    """Result of a weighted QR factorization."""

    Q: DenseMatrix  # m x n, W-orthonormal columns
    R: DenseMatrix  # n x n upper triangular, positive diagonal
    WQ: Optional[DenseMatrix] = None  # W Q, when requested
    refinements: int = 0  # refinement passes performed (n W applies each)


def _householder_positive(Z: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix]:
    """Economic QR with the signs fixed so that diag(R) >= 0."""
    Q_Z, R_Z = scipy.linalg.qr(Z, mode="economic")
    signs = np.sign(np.diag(R_Z))
    signs[signs == 0] = 1.0
    return Q_Z * signs, R_Z * signs[:, None]


def _cholqr_pass(
    Z: DenseMatrix, W: SpdOp
) -> tuple[DenseMatrix, DenseMatrix, DenseMatrix, float]:
    Q_Z, R_Z = _householder_positive(Z)
    Q_W = W.apply_block(Q_Z)
    gram = Q_Z.T @ Q_W
    gram = 0.5 * (gram + gram.T)

    R_W, info = potrf(gram, lower=False)
    if info > 0:
        raise RankDeficiencyError(
            f"weighted Gram matrix is not positive definite at column {info - 1}",
            column=info - 1,
        )

    # Q = Q_Z R_W^{-1} and W Q = Q_W R_W^{-1}, as triangular solves on the rows
    Q = scipy.linalg.solve_triangular(R_W, Q_Z.T, trans="T", lower=False).T
    WQ = scipy.linalg.solve_triangular(R_W, Q_W.T, trans="T", lower=False).T
    R = R_W @ R_Z
    estimate = float(_EPS * np.linalg.cond(R_W) ** 2)
    return Q, R, WQ, estimate


def weighted_cholqr(
    Z, W, want_wq: bool = False, refine: bool = True
) -> WeightedQrResult:
    """Factor Z = Q R with Q^T W Q = I.

    Costs exactly n applies of W (m x n input) unless a refinement pass fires,
    which happens when the loss of W-orthogonality estimated from the Gram
    factor exceeds 1e-8.

    Args:
        Z: Dense m x n block with n <= m
        W: SpdOp (or dense SPD array) of dimension m
        want_wq: Also return W Q, which costs no extra applies
        refine: Allow the automatic refinement pass

    Returns:
        WeightedQrResult: Q, R, optionally WQ, and the refinement count

    Raises:
        DimensionError: If shapes disagree or n > m
        RankDeficiencyError: If the Gram Cholesky breaks down
        NumericalFailure: If Z contains NaN or infinity
    """
    weight = as_spd_op(W)
    block = np.asarray(Z, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != weight.n:
        raise DimensionError(
            f"block of shape {block.shape} does not match weight {weight.n}x{weight.n}"
        )
    m, n = block.shape
    if n < 1 or n > m:
        raise DimensionError(f"weighted QR needs 1 <= n <= m, got {m}x{n}")
    if not np.all(np.isfinite(block)):
        raise NumericalFailure("block contains non-finite entries")

    Q, R, WQ, estimate = _cholqr_pass(block, weight)
    refinements = 0
    if refine and estimate > REFINE_THRESHOLD:
        _LOGGER.warning(
            "Estimated W-orthogonality loss %.2e exceeds %.0e; refining %dx%d block",
            estimate,
            REFINE_THRESHOLD,
            m,
            n,
        )
        Q, R_refine, WQ, _ = _cholqr_pass(Q, weight)
        R = R_refine @ R
        refinements = 1
    else:
        _LOGGER.debug("Weighted QR of %dx%d block, loss estimate %.2e", m, n, estimate)

    return WeightedQrResult(Q=Q, R=R, WQ=WQ if want_wq else None, refinements=refinements)


def reorthogonalize(res: WeightedQrResult, W) -> WeightedQrResult:
    """Run one more weighted QR pass on res.Q and compose the R factors."""
    weight = as_spd_op(W)
    again = weighted_cholqr(res.Q, weight, want_wq=True, refine=False)
    return WeightedQrResult(
        Q=again.Q,
        R=again.R @ res.R,
        WQ=again.WQ,
        refinements=res.refinements + 1,
    )


def orthogonality_residual(Q, W) -> float:
    """Return ||Q^T W Q - I||_2."""
    weight = as_spd_op(W)
    block = np.asarray(Q, dtype=np.float64)
    gram = block.T @ weight.apply_block(block)
    return float(np.linalg.norm(gram - np.eye(block.shape[1]), 2))
