"""Dense reference (S,T)-GSVD and generalized eigensolver for validation.

Everything here materializes its inputs and is meant for problems small
enough that an O(n^3) factorization is cheap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .const import ORACLE_MAX_DIM, SANDWICH_SLACK, SYMMETRY_TOL
from .exceptions import DimensionError, NotSymmetricError, OracleSizeError
from .operator_interface import DenseMatrix
from .operators.dense import as_dense_matrix, as_linear_op, as_spd_op
from .operators.norms import sqrt_transform, weighted_transform
from .rand_gsvd import GsvdFactors

_LOGGER = logging.getLogger(__name__)


@dataclass
class ExactGsvd:
    """Full (S,T)-GSVD: A = U diag(sigma) V[:, :len(sigma)]^T T."""

    U: DenseMatrix  # m x m, S-orthonormal
    sigma: DenseMatrix  # min(m, n), nonincreasing
    V: DenseMatrix  # n x n, T-orthonormal

    def U_k(self, k: int) -> DenseMatrix:
        """Return the leading k left vectors."""
        return self.U[:, :k]

    def V_k(self, k: int) -> DenseMatrix:
        """Return the leading k right vectors."""
        return self.V[:, :k]

    def V_perp(self, k: int) -> DenseMatrix:
        """Return the trailing n - k right vectors."""
        return self.V[:, k:]

    def sigma_perp(self, k: int) -> DenseMatrix:
        """Return sigma_{k+1}, ..., padded with zeros to length n - k."""
        n = self.V.shape[0]
        tail = np.zeros(n - k)
        values = self.sigma[k:]
        tail[: values.shape[0]] = values
        return tail

    def gap(self, k: int) -> float:
        """Return sigma_{k+1} / sigma_k (0 if sigma_k vanishes or k = rank)."""
        if k < 1 or k > self.sigma.shape[0]:
            raise DimensionError(f"k must lie in [1, {self.sigma.shape[0]}], got {k}")
        if k == self.sigma.shape[0] or self.sigma[k - 1] == 0.0:
            return 0.0
        return float(self.sigma[k] / self.sigma[k - 1])

    def as_factors(self, k: Optional[int] = None) -> GsvdFactors:
        """Return the leading k triplets (all min(m, n) by default)."""
        rank = self.sigma.shape[0] if k is None else min(k, self.sigma.shape[0])
        return GsvdFactors(
            U_hat=self.U[:, :rank].copy(),
            sigma_hat=self.sigma[:rank].copy(),
            V_hat=self.V[:, :rank].copy(),
            info={"method": "exact"},
        )


def _check_size(*dims: int) -> None:
    if max(dims) > ORACLE_MAX_DIM:
        raise OracleSizeError(
            f"dense oracle limited to dimension {ORACLE_MAX_DIM}, got {max(dims)}"
        )


def exact_gsvd(A, S, T) -> ExactGsvd:
    """Compute the full (S,T)-GSVD through Cholesky factors of S and T.

    sigma are the singular values of L_S^T A L_T^{-T}; U = L_S^{-T} W and
    V = L_T^{-T} Z for that SVD's singular vectors W and Z.

    Raises:
        OracleSizeError: If any dimension exceeds the dense cap
    """
    op = as_linear_op(A)
    _check_size(*op.shape)
    left, right = as_spd_op(S), as_spd_op(T)
    transformed = weighted_transform(op, left, right)
    W, sigma, Zt = scipy.linalg.svd(transformed, full_matrices=True)
    U = scipy.linalg.solve_triangular(left.cholesky(), W, lower=True, trans="T")
    V = scipy.linalg.solve_triangular(right.cholesky(), Zt.T, lower=True, trans="T")
    _LOGGER.debug("Exact GSVD of %dx%d: sigma_1=%.6e", *op.shape, sigma[0])
    return ExactGsvd(U=U, sigma=sigma, V=V)


def sigma_via_sqrt(A, S, T) -> DenseMatrix:
    """Return the singular values of S^{1/2} A T^{-1/2}."""
    op = as_linear_op(A)
    _check_size(*op.shape)
    return scipy.linalg.svdvals(sqrt_transform(op, S, T))


def ground_truth_floor(A, S, T) -> float:
    """Return the largest discrepancy between the two transform routes.

    Measured relative to sigma_1; it bounds how far oracle singular values
    can be trusted for ill-conditioned weights.
    """
    cholesky_route = exact_gsvd(A, S, T).sigma
    sqrt_route = sigma_via_sqrt(A, S, T)
    floor = float(np.max(np.abs(cholesky_route - sqrt_route)) / cholesky_route[0])
    _LOGGER.info("Ground-truth discrepancy between transform routes: %.3e", floor)
    return floor


@dataclass
class SandwichReport:
    """Check of s_j / sqrt(|S^{-1}| |T|) <= sigma_j <= sqrt(|S| |T^{-1}|) s_j."""

    sigma: DenseMatrix
    plain_sigma: DenseMatrix
    lower_factor: float
    upper_factor: float
    ratios: DenseMatrix  # sigma_j / s_j
    violations: list[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Return True if no index violates the sandwich."""
        return not self.violations


def singular_value_sandwich_check(A, S, T) -> SandwichReport:
    """Compare weighted and plain singular values against the norm sandwich."""
    op = as_linear_op(A)
    _check_size(*op.shape)
    left, right = as_spd_op(S), as_spd_op(T)
    s_eigs = scipy.linalg.eigvalsh(left.to_dense())
    t_eigs = scipy.linalg.eigvalsh(right.to_dense())
    lower_factor = 1.0 / np.sqrt(t_eigs[-1] / s_eigs[0])  # 1 / sqrt(|S^-1| |T|)
    upper_factor = np.sqrt(s_eigs[-1] / t_eigs[0])  # sqrt(|S| |T^-1|)

    sigma = exact_gsvd(op, left, right).sigma
    plain = scipy.linalg.svdvals(op.to_dense())
    slack = SANDWICH_SLACK * sigma[0]
    violations = [
        j
        for j in range(sigma.shape[0])
        if sigma[j] < lower_factor * plain[j] - slack
        or sigma[j] > upper_factor * plain[j] + slack
    ]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(plain > 0, sigma / plain, np.nan)
    if violations:
        _LOGGER.warning("Singular value sandwich violated at indices %s", violations)
    return SandwichReport(
        sigma=sigma,
        plain_sigma=plain,
        lower_factor=float(lower_factor),
        upper_factor=float(upper_factor),
        ratios=ratios,
        violations=violations,
    )


def exact_gheig(A, B) -> tuple[DenseMatrix, DenseMatrix]:
    """Solve A x = lambda B x for symmetric A and SPD B.

    Returns:
        Eigenvalues in nonincreasing order and B-orthonormal eigenvectors

    Raises:
        NotSymmetricError: If A is not symmetric
    """
    lhs = as_dense_matrix(A, "A")
    rhs = as_spd_op(B).to_dense()
    _check_size(lhs.shape[0])
    if lhs.shape != rhs.shape:
        raise DimensionError(f"pencil shapes differ: {lhs.shape} vs {rhs.shape}")
    if np.linalg.norm(lhs - lhs.T) > SYMMETRY_TOL * np.linalg.norm(lhs):
        raise NotSymmetricError("A is not symmetric")
    eigvals, eigvecs = scipy.linalg.eigh(0.5 * (lhs + lhs.T), rhs)
    return eigvals[::-1].copy(), eigvecs[:, ::-1].copy()
