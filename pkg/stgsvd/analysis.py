"""Accuracy metrics, canonical angles, a-priori bounds and sensitivity indices."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .const import BOUND_SLACK, DEFAULT_DELTA, PINV_RTOL
from .exceptions import AssumptionViolationError, ConfigError, DimensionError
from .operator_interface import DenseMatrix, SpdOp
from .operators.dense import as_linear_op, as_spd_op
from .operators.norms import weighted_op_norm
from .rand_gsvd import GsvdFactors
from .reference import ExactGsvd, exact_gheig
from .sampling import Preconditioner
from .weighted_qr import weighted_cholqr

_LOGGER = logging.getLogger(__name__)


def projection_error(A, S, T, f: GsvdFactors) -> float:
    """Return ||A - U_hat diag(sigma_hat) V_hat^T T||_{S,T}."""
    op, left, right = as_linear_op(A), as_spd_op(S), as_spd_op(T)
    approx = (f.U_hat * f.sigma_hat) @ (right.to_dense() @ f.V_hat).T
    return weighted_op_norm(op.to_dense() - approx, left, right)


def canonical_angles(X_hat, X, W) -> DenseMatrix:
    """Canonical angles between range(X_hat) and range(X) in the W inner product.

    Both blocks are W-orthonormalized first; angles come back nonincreasing.
    """
    weight = as_spd_op(W)
    basis_hat = weighted_cholqr(np.asarray(X_hat, float), weight).Q
    basis = weighted_cholqr(np.asarray(X, float), weight).Q
    cosines = scipy.linalg.svdvals(basis_hat.T @ weight.apply_block(basis))
    return np.sort(np.arccos(np.clip(cosines, 0.0, 1.0)))[::-1]


@dataclass
class ErrorReport:
    """Accuracy of approximate factors against the exact decomposition."""

    abs_error: float  # ||A - A_hat||_{S,T}
    rel_error: float  # abs_error / sigma_1
    best_possible: float  # sigma_{k+1} / sigma_1
    sv_abs_errors: DenseMatrix
    left_angles: DenseMatrix
    right_angles: DenseMatrix


def error_report(
    A, S, T, f: GsvdFactors, truth: ExactGsvd, k: Optional[int] = None
) -> ErrorReport:
    """Compare factors with the oracle.

    Args:
        A, S, T: The problem
        f: Approximate factors
        truth: Exact decomposition of the same problem
        k: Comparison rank for best_possible and the angles (default f.rank)

    Raises:
        DimensionError: If the factors have fewer than k triplets
    """
    k = f.rank if k is None else k
    if f.rank < k or k < 1:
        raise DimensionError(f"factors have rank {f.rank}, cannot compare at k={k}")
    op, left, right = as_linear_op(A), as_spd_op(S), as_spd_op(T)
    sigma = truth.sigma
    abs_err = projection_error(op, left, right, f)
    best = float(sigma[k] / sigma[0]) if k < sigma.shape[0] else 0.0

    common = min(f.rank, sigma.shape[0])
    sv_errors = np.abs(sigma[:common] - f.sigma_hat[:common])
    return ErrorReport(
        abs_error=abs_err,
        rel_error=abs_err / sigma[0],
        best_possible=best,
        sv_abs_errors=sv_errors,
        left_angles=canonical_angles(f.U_hat[:, :k], truth.U_k(k), left),
        right_angles=canonical_angles(f.V_hat[:, :k], truth.V_k(k), right),
    )


def omega_blocks(
    Omega, T, truth: ExactGsvd, k: int
) -> tuple[DenseMatrix, DenseMatrix]:
    """Return (V_k^T T Omega, V_perp^T T Omega)."""
    weight = as_spd_op(T)
    weighted = weight.apply_block(np.asarray(Omega, float))
    return truth.V_k(k).T @ weighted, truth.V_perp(k).T @ weighted


def _pinv_top(block: DenseMatrix, k: int) -> DenseMatrix:
    inverse, rank = scipy.linalg.pinv(block, atol=0.0, rtol=PINV_RTOL, return_rank=True)
    if rank < k:
        raise AssumptionViolationError(
            f"rank(V_k^T T Omega) = {rank} < k = {k}; the sketch misses the "
            "dominant subspace"
        )
    return inverse


def omega_interaction(Omega, T, truth: ExactGsvd, k: int) -> float:
    """Return ||Omega_2 Omega_1^+||_2 for the T-weighted sketch blocks.

    Raises:
        AssumptionViolationError: If rank(Omega_1) < k
    """
    top, rest = omega_blocks(Omega, T, truth, k)
    inverse = _pinv_top(top, k)
    if rest.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(rest @ inverse, 2))


def sigma_weighted_interaction(Omega, T, truth: ExactGsvd, k: int) -> float:
    """Return ||Sigma_perp Omega_2 Omega_1^+||_2."""
    top, rest = omega_blocks(Omega, T, truth, k)
    inverse = _pinv_top(top, k)
    if rest.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(truth.sigma_perp(k)[:, None] * (rest @ inverse), 2))


def cg_constant(k: int, p: int, n: int, delta: float = DEFAULT_DELTA) -> float:
    """Return the Gaussian tail constant used by the probabilistic bounds.

    Raises:
        ConfigError: If p < 2, delta is outside (0, 1) or k + p > n
    """
    if k < 1:
        raise ConfigError(f"must be at least 1, got {k}", "k")
    if p < 2:
        raise ConfigError(f"must be at least 2, got {p}", "p")
    if not 0.0 < delta < 1.0:
        raise ConfigError(f"must lie in (0, 1), got {delta}", "delta")
    ell = k + p
    if ell > n:
        raise ConfigError(f"k + p = {ell} exceeds n = {n}", "ell")
    leading = math.e * math.sqrt(ell) / p
    tail = ((2.0 / delta) / math.sqrt(2.0 * math.pi * (p + 1))) ** (1.0 / (p + 1))
    spread = math.sqrt(n - k) + math.sqrt(ell) + math.sqrt(2.0 * math.log(2.0 / delta))
    return leading * tail * spread


@dataclass
class BoundInputs:
    """Everything the error bounds need for one sample."""

    sigma: DenseMatrix  # exact weighted singular values
    k: int
    p: int
    q: int
    n: int
    kappa: float  # kappa_2(T), or kappa_2(L^T T L) with preconditioned sampling
    delta: float = DEFAULT_DELTA
    omega: Optional[float] = None  # ||Omega_2 Omega_1^+||
    sigma_interaction: Optional[float] = None  # ||Sigma_perp Omega_2 Omega_1^+||


@dataclass
class BoundReport:
    """Right-hand sides of the bounds and whether the realized error obeys them."""

    realized: float
    bounds: dict[str, float] = field(default_factory=dict)
    passed: dict[str, bool] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        """Return True if every evaluated bound holds."""
        return all(self.passed.values())


def bound_check(inputs: BoundInputs, realized: float) -> BoundReport:
    """Evaluate the gap-dependent, gap-independent and probabilistic bounds.

    ``realized`` is ||A - Q Q^T S A||_{S,T} for the untruncated range basis.
    Per-sample bounds need ``omega``; the probabilistic ones need p >= 2.

    The probabilistic gap-dependent bound substitutes kappa * C_g^2 for
    omega^2 in the per-sample form and so carries gamma_k^(4q). The sharper
    gamma_k^(4q+2) variant is not evaluated.
    """
    sigma = np.asarray(inputs.sigma, float)
    k, q = inputs.k, inputs.q
    next_sigma = float(sigma[k]) if k < sigma.shape[0] else 0.0
    gamma = next_sigma / sigma[k - 1] if sigma[k - 1] > 0 else 0.0
    power = 1.0 / (4 * q + 2)
    report = BoundReport(realized=realized)

    if inputs.omega is not None:
        omega_sq = inputs.omega**2
        if inputs.sigma_interaction is not None:
            report.bounds["gap_dependent"] = math.sqrt(
                next_sigma**2 + gamma ** (4 * q) * inputs.sigma_interaction**2
            )
        else:
            report.bounds["gap_dependent"] = next_sigma * math.sqrt(
                1.0 + gamma ** (4 * q) * omega_sq
            )
        report.bounds["gap_independent"] = (1.0 + omega_sq) ** power * next_sigma

    if inputs.p >= 2:
        cg = cg_constant(k, inputs.p, inputs.n, inputs.delta)
        scaled = inputs.kappa * cg**2
        report.bounds["probabilistic_gap_dependent"] = next_sigma * math.sqrt(
            1.0 + gamma ** (4 * q) * scaled
        )
        report.bounds["probabilistic_gap_independent"] = (1.0 + scaled) ** power * next_sigma

    slack = BOUND_SLACK * float(sigma[0])
    for name, rhs in report.bounds.items():
        report.passed[name] = realized <= rhs + slack
        if not report.passed[name]:
            _LOGGER.warning("Bound %s violated: %.6e > %.6e", name, realized, rhs)
    return report


@dataclass
class GammaReport:
    """lambda_{k+1}/lambda_k <= |Gamma_2| |Gamma_1^{-1}| <= kappa."""

    lower: float
    middle: float
    upper: float

    @property
    def passed(self) -> bool:
        """Return True if the chain holds up to rounding."""
        tol = 1e-8
        return self.lower <= self.middle * (1 + tol) and self.middle <= self.upper * (
            1 + tol
        )


def gamma_interlacing_check(
    T, truth: ExactGsvd, k: int, precond: Optional[Preconditioner] = None
) -> GammaReport:
    """Check the interlacing chain for Gamma_i = V_i^T M V_i.

    M = T^2 without a preconditioner and T L L^T T with one; the reference
    spectrum is that of T or of L^T T L respectively.
    """
    weight = as_spd_op(T)
    n = weight.n
    if not 1 <= k < n:
        raise DimensionError(f"k must lie in [1, {n - 1}], got {k}")
    dense = weight.to_dense()
    if precond is None:
        middle_op = dense @ dense
        spectrum = scipy.linalg.eigvalsh(dense)
    else:
        L = precond.to_dense()
        middle_op = dense @ L @ L.T @ dense
        reference = L.T @ dense @ L
        spectrum = scipy.linalg.eigvalsh(0.5 * (reference + reference.T))
    spectrum = spectrum[::-1]

    V_k, V_perp = truth.V_k(k), truth.V_perp(k)
    gamma_1 = V_k.T @ middle_op @ V_k
    gamma_2 = V_perp.T @ middle_op @ V_perp
    middle = (
        scipy.linalg.eigvalsh(0.5 * (gamma_2 + gamma_2.T))[-1]
        / scipy.linalg.eigvalsh(0.5 * (gamma_1 + gamma_1.T))[0]
    )
    return GammaReport(
        lower=float(spectrum[k] / spectrum[k - 1]),
        middle=float(middle),
        upper=float(spectrum[0] / spectrum[-1]),
    )


@dataclass
class GhepProjectionReport:
    """Low-rank projection errors for C = B^{-1} A in the B geometry."""

    one_sided: float  # ||C - P C||_{B->B}
    two_sided: float  # ||C - P C P||_{B->B}
    bound: float  # 2 (1 + kappa(B) C_g^2)^{1/2} |lambda_{k+1}|

    @property
    def factor_two_holds(self) -> bool:
        """Return True if the symmetric form is within twice the one-sided one."""
        return self.two_sided <= 2.0 * self.one_sided * (1 + 1e-8) + 1e-14

    @property
    def passed(self) -> bool:
        """Return True if the symmetric form obeys the a-priori bound."""
        return self.two_sided <= self.bound


def ghep_projection_check(
    A_sym, B, Q, k: int, p: int, delta: float = DEFAULT_DELTA
) -> GhepProjectionReport:
    """Evaluate the projection errors of a B-orthonormal basis Q for B^{-1} A."""
    weight = as_spd_op(B)
    lhs = np.asarray(A_sym, float)
    basis = np.asarray(Q, float)
    n = weight.n
    dense_b = weight.to_dense()
    chol = weight.cholesky()
    operator = scipy.linalg.cho_solve((chol, True), lhs)
    projector = basis @ (basis.T @ dense_b)

    def b_norm(X: DenseMatrix) -> float:
        scaled = scipy.linalg.solve_triangular(chol, X.T, lower=True).T
        return float(scipy.linalg.svdvals(chol.T @ scaled)[0])

    one_sided = b_norm(operator - projector @ operator)
    two_sided = b_norm(operator - projector @ operator @ projector)

    eigvals, _ = exact_gheig(lhs, weight)
    b_spectrum = scipy.linalg.eigvalsh(dense_b)
    kappa_b = b_spectrum[-1] / b_spectrum[0]
    next_lambda = abs(eigvals[k]) if k < n else 0.0
    cg = cg_constant(k, p, n, delta)
    bound = 2.0 * math.sqrt(1.0 + kappa_b * cg**2) * next_lambda
    return GhepProjectionReport(one_sided=one_sided, two_sided=two_sided, bound=bound)


def sensitivity_indices(f: GsvdFactors, T, basis) -> DenseMatrix:
    """Return |diag(sigma_hat) V_hat^T T theta_i|_2 / |theta_i|_T per column.

    Raises:
        ValueError: If a basis column has zero T-norm
    """
    weight: SpdOp = as_spd_op(T)
    directions = np.asarray(basis, float)
    weighted = weight.apply_block(directions)
    denominators = np.sqrt(np.einsum("ij,ij->j", directions, weighted))
    if np.any(denominators == 0.0):
        raise ValueError("basis contains a zero column")
    numerators = np.linalg.norm(f.sigma_hat[:, None] * (f.V_hat.T @ weighted), axis=0)
    return numerators / denominators


def brute_force_sensitivity_indices(A, S, T, basis) -> DenseMatrix:
    """Return |A theta_i|_S / |theta_i|_T from full products."""
    op, left, right = as_linear_op(A), as_spd_op(S), as_spd_op(T)
    directions = np.asarray(basis, float)
    images = op.apply_block(directions)
    numerators = np.sqrt(np.einsum("ij,ij->j", images, left.apply_block(images)))
    denominators = np.sqrt(
        np.einsum("ij,ij->j", directions, right.apply_block(directions))
    )
    if np.any(denominators == 0.0):
        raise ValueError("basis contains a zero column")
    return numerators / denominators
