"""Randomized (S,T)-weighted GSVD drivers.

All drivers return factors with A ~ U_hat diag(sigma_hat) V_hat^T T, where
U_hat is S-orthonormal and V_hat is T-orthonormal. The weights are only
touched through SpdOp products; T^{-1} weighting is realized by swapping
apply and solve.
"""

from __future__ import annotations

import dataclasses
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
import scipy.linalg

from .const import (
    DEFAULT_OVERSAMPLING,
    DEFAULT_RETRY_COUNT,
    DEFAULT_SUBSPACE_ITERATIONS,
    METHOD_GENEIG,
    METHOD_GSVD,
    METHOD_GSVD_TRANSPOSE,
    METHOD_TWO_SIDED,
    NEGATIVE_EIG_TOL,
    PINV_RTOL,
    SAMPLER_GAUSSIAN,
    TWO_SIDED_SEED_XOR,
)
from .exceptions import ConfigError, DimensionError, RankDeficiencyError
from .operator_interface import DenseMatrix, LinearOp, SpdOp
from .operators.composite import LowRankOperator, TransposedOperator, invert
from .operators.dense import as_linear_op, as_spd_op
from .sampler_factory import SamplerFactory
from .sampling import SamplerSpec
from .weighted_qr import weighted_cholqr

_LOGGER = logging.getLogger(__name__)

# Weight slots whose refinement passes are tracked separately
SLOT_LEFT = "left"  # S-weighted QR of range sketches
SLOT_RIGHT_INVERSE = "right_inverse"  # T^{-1}-weighted QR inside the power loop
SLOT_RIGHT = "right"  # T-weighted QR of the Stage 2 block


@dataclass(frozen=True)
class SketchConfig:
    """Target rank, oversampling, power steps and sampler."""

    k: int
    p: int = DEFAULT_OVERSAMPLING
    q: int = DEFAULT_SUBSPACE_ITERATIONS
    sampler: SamplerSpec = field(default_factory=SamplerSpec)
    truncate: bool = True

    @property
    def ell(self) -> int:
        """Return the sketch width k + p."""
        return self.k + self.p

    def validate(self, m: int, n: int) -> None:
        """Check the configuration against an m x n operator.

        Raises:
            ConfigError: Naming the offending field
        """
        if self.k < 1:
            raise ConfigError(f"must be at least 1, got {self.k}", "k")
        if self.p < 0:
            raise ConfigError(f"must be non-negative, got {self.p}", "p")
        if self.q < 0:
            raise ConfigError(f"must be non-negative, got {self.q}", "q")
        if self.ell > min(m, n):
            raise ConfigError(
                f"k + p = {self.ell} exceeds min(m, n) = {min(m, n)}", "ell"
            )

    def replace(self, **changes: Any) -> "SketchConfig":
        """Return a copy with some fields changed."""
        return dataclasses.replace(self, **changes)


@dataclass
class GsvdFactors:
    """Approximate (S,T)-GSVD factors."""

    U_hat: DenseMatrix  # m x r, S-orthonormal
    sigma_hat: DenseMatrix  # r, nonincreasing and nonnegative
    V_hat: DenseMatrix  # n x r, T-orthonormal
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def rank(self) -> int:
        """Return r."""
        return int(self.sigma_hat.shape[0])

    def truncate(self, k: int) -> "GsvdFactors":
        """Keep the leading k triplets without re-projection."""
        if k < 0:
            raise ConfigError(f"must be non-negative, got {k}", "k")
        if k >= self.rank:
            return self
        return GsvdFactors(
            U_hat=self.U_hat[:, :k].copy(),
            sigma_hat=self.sigma_hat[:k].copy(),
            V_hat=self.V_hat[:, :k].copy(),
            info={**self.info, "truncated_to": k},
        )


@dataclass
class _Sketch:
    """Intermediate products of the two-stage algorithm."""

    Q: DenseMatrix
    SQ: DenseMatrix
    Q_B: DenseMatrix
    TQ_B: DenseMatrix
    U_B: DenseMatrix
    sigma: DenseMatrix
    V_B: DenseMatrix
    refinements: Counter


def _check_weights(A: LinearOp, S: SpdOp, T: SpdOp) -> None:
    m, n = A.shape
    if S.n != m or T.n != n:
        raise DimensionError(
            f"weights {S.n}x{S.n} and {T.n}x{T.n} do not match a {m}x{n} operator"
        )


def _range_finder(
    A: LinearOp, S: SpdOp, T_inv: SpdOp, Omega: DenseMatrix, q: int
) -> tuple[DenseMatrix, DenseMatrix, Counter]:
    """Return an S-orthonormal basis Q of range((A T^{-1} A^T S)^q A Omega) and S Q."""
    refinements: Counter = Counter()
    left = weighted_cholqr(A.apply_block(Omega), S, want_wq=True)
    refinements[SLOT_LEFT] += left.refinements

    for iteration in range(q):
        try:
            right = weighted_cholqr(
                A.apply_transpose_block(left.WQ), T_inv, want_wq=True
            )
            refinements[SLOT_RIGHT_INVERSE] += right.refinements
            left = weighted_cholqr(A.apply_block(right.WQ), S, want_wq=True)
            refinements[SLOT_LEFT] += left.refinements
        except RankDeficiencyError as err:
            raise RankDeficiencyError(
                f"subspace iteration {iteration}: {err}",
                column=err.column,
                iteration=iteration,
            ) from err
        _LOGGER.debug("Subspace iteration %d/%d done", iteration + 1, q)

    return left.Q, left.WQ, refinements


def rand_subspace(A, S, T, Omega, q: int) -> DenseMatrix:
    """Randomized subspace iteration in the (S,T) geometry.

    Args:
        A: LinearOp (or dense array), m x n
        S: SpdOp of dimension m
        T: SpdOp of dimension n
        Omega: Dense n x ell sketch
        q: Number of subspace iterations

    Returns:
        DenseMatrix: m x ell matrix with S-orthonormal columns

    Raises:
        RankDeficiencyError: With the failing iteration index
    """
    op, left, right = as_linear_op(A), as_spd_op(S), as_spd_op(T)
    _check_weights(op, left, right)
    if q < 0:
        raise ConfigError(f"must be non-negative, got {q}", "q")
    Q, _, _ = _range_finder(op, left, invert(right), np.asarray(Omega, float), q)
    return Q


def _two_stage(
    A: LinearOp, S: SpdOp, T: SpdOp, Omega: DenseMatrix, q: int
) -> _Sketch:
    Q, SQ, refinements = _range_finder(A, S, invert(T), Omega, q)

    # Stage 2: A ~ Q (T^{-1} A^T S Q)^T T, then a small SVD
    block = A.apply_transpose_block(SQ)
    right = weighted_cholqr(T.solve_block(block), T, want_wq=True)
    refinements[SLOT_RIGHT] += right.refinements
    U_B, sigma, V_Bt = scipy.linalg.svd(
        right.R.T, full_matrices=False, lapack_driver="gesvd"
    )
    return _Sketch(
        Q=Q,
        SQ=SQ,
        Q_B=right.Q,
        TQ_B=right.WQ,
        U_B=U_B,
        sigma=sigma,
        V_B=V_Bt.T,
        refinements=refinements,
    )


def _with_retries(
    run: Callable[[DenseMatrix], GsvdFactors], Omega: DenseMatrix, k: int
) -> GsvdFactors:
    """Run ``run``, dropping trailing sketch columns after rank breakdowns."""
    attempt = 0
    while True:
        try:
            factors = run(Omega)
            factors.info["retries"] = attempt
            return factors
        except RankDeficiencyError as err:
            if attempt >= DEFAULT_RETRY_COUNT or Omega.shape[1] - 1 < k:
                _LOGGER.error("Rank deficiency not recoverable: %s", err)
                raise
            attempt += 1
            _LOGGER.warning(
                "Rank deficiency (%s); retry %d/%d with %d sketch columns",
                err,
                attempt,
                DEFAULT_RETRY_COUNT,
                Omega.shape[1] - 1,
            )
            Omega = Omega[:, :-1]


def _finish(factors: GsvdFactors, cfg: SketchConfig) -> GsvdFactors:
    return factors.truncate(cfg.k) if cfg.truncate else factors


def _info(method: str, cfg: SketchConfig, ell: int, refinements: Counter) -> dict:
    return {
        "method": method,
        "k": cfg.k,
        "p": cfg.p,
        "q": cfg.q,
        "ell": ell,
        "seed": cfg.sampler.seed,
        "sampler": cfg.sampler.kind,
        "refinements": dict(refinements),
    }


def rand_gsvd(A, S, T, cfg: SketchConfig) -> GsvdFactors:
    """Two-stage randomized (S,T)-GSVD.

    Stage 1 builds an S-orthonormal range basis Q with q subspace
    iterations; Stage 2 factors T^{-1} A^T S Q with a T-weighted QR and takes
    the SVD of the transposed triangular factor.
    """
    op, left, right = as_linear_op(A), as_spd_op(S), as_spd_op(T)
    _check_weights(op, left, right)
    m, n = op.shape
    cfg.validate(m, n)
    _LOGGER.debug("rand_gsvd on %dx%d: k=%d p=%d q=%d", m, n, cfg.k, cfg.p, cfg.q)

    def run(Omega: DenseMatrix) -> GsvdFactors:
        sketch = _two_stage(op, left, right, Omega, cfg.q)
        return GsvdFactors(
            U_hat=sketch.Q @ sketch.U_B,
            sigma_hat=sketch.sigma,
            V_hat=sketch.Q_B @ sketch.V_B,
            info=_info(METHOD_GSVD, cfg, Omega.shape[1], sketch.refinements),
        )

    Omega = SamplerFactory.create(cfg.sampler).draw(n, cfg.ell)
    return _finish(_with_retries(run, Omega, cfg.k), cfg)


def rand_gsvd_transpose(A, S, T, cfg: SketchConfig) -> GsvdFactors:
    """Run the two-stage algorithm on A^T with weights (T^{-1}, S^{-1}).

    A^T ~ X diag(sigma) Y^T S^{-1} maps back through U = S^{-1} Y and
    V = T^{-1} X; both products come out of the weighted QRs for free. The
    sketch lives in R^m and the S-weighted QR of Stage 2 costs ell solves
    with S.
    """
    op, left, right = as_linear_op(A), as_spd_op(S), as_spd_op(T)
    _check_weights(op, left, right)
    m, n = op.shape
    cfg.validate(m, n)

    def run(Omega: DenseMatrix) -> GsvdFactors:
        sketch = _two_stage(
            TransposedOperator(op), invert(right), invert(left), Omega, cfg.q
        )
        return GsvdFactors(
            U_hat=sketch.TQ_B @ sketch.V_B,
            sigma_hat=sketch.sigma,
            V_hat=sketch.SQ @ sketch.U_B,
            info=_info(METHOD_GSVD_TRANSPOSE, cfg, Omega.shape[1], sketch.refinements),
        )

    Omega = SamplerFactory.create(cfg.sampler).draw(m, cfg.ell)
    return _finish(_with_retries(run, Omega, cfg.k), cfg)


def two_sided_gsvd(A, S, T, cfg: SketchConfig) -> GsvdFactors:
    """Two-sided sketch baseline: A ~ Q Q^T S A T^{-1} Z Z^T.

    The left sketch Omega uses cfg.sampler; the right sketch Psi is Gaussian
    with the seed ``seed ^ TWO_SIDED_SEED_XOR``.
    """
    op, left, right = as_linear_op(A), as_spd_op(S), as_spd_op(T)
    _check_weights(op, left, right)
    m, n = op.shape
    cfg.validate(m, n)
    ell = cfg.ell

    Omega = SamplerFactory.create(cfg.sampler).draw(n, ell)
    psi_spec = SamplerSpec(
        kind=SAMPLER_GAUSSIAN, seed=cfg.sampler.seed ^ TWO_SIDED_SEED_XOR
    )
    Psi = SamplerFactory.create(psi_spec).draw(m, ell)

    range_basis = weighted_cholqr(op.apply_block(Omega), left, want_wq=True)
    corange_basis = weighted_cholqr(
        op.apply_transpose_block(Psi), invert(right), want_wq=True
    )
    # F = Q^T S A T^{-1} Z
    core = range_basis.WQ.T @ op.apply_block(corange_basis.WQ)
    U_F, sigma, V_Ft = scipy.linalg.svd(core, lapack_driver="gesvd")

    refinements = Counter(
        {
            SLOT_LEFT: range_basis.refinements,
            SLOT_RIGHT_INVERSE: corange_basis.refinements,
        }
    )
    factors = GsvdFactors(
        U_hat=range_basis.Q @ U_F,
        sigma_hat=sigma,
        V_hat=corange_basis.WQ @ V_Ft.T,
        info={**_info(METHOD_TWO_SIDED, cfg, ell, refinements), "retries": 0},
    )
    return _finish(factors, cfg)


def gheig_gsvd(A, S, T, cfg: SketchConfig) -> GsvdFactors:
    """Generalized-eigenproblem baseline.

    Sketches C = T^{-1} A^T S A with a T-weighted range finder (cfg.q power
    steps), solves the projected pencil by Rayleigh-Ritz, takes square roots
    of the eigenvalues and recovers U_hat from A V_hat.
    """
    op, left, right = as_linear_op(A), as_spd_op(S), as_spd_op(T)
    _check_weights(op, left, right)
    m, n = op.shape
    cfg.validate(m, n)

    def apply_c(X: DenseMatrix) -> DenseMatrix:
        return right.solve_block(
            op.apply_transpose_block(left.apply_block(op.apply_block(X)))
        )

    refinements: Counter = Counter()
    Omega = SamplerFactory.create(cfg.sampler).draw(n, cfg.ell)
    basis = weighted_cholqr(apply_c(Omega), right)
    refinements[SLOT_RIGHT] += basis.refinements
    for _ in range(cfg.q):
        basis = weighted_cholqr(apply_c(basis.Q), right)
        refinements[SLOT_RIGHT] += basis.refinements

    AQ = op.apply_block(basis.Q)
    SAQ = left.apply_block(AQ)
    projected = AQ.T @ SAQ
    eigvals, eigvecs = scipy.linalg.eigh(0.5 * (projected + projected.T))
    eigvals, eigvecs = eigvals[::-1], eigvecs[:, ::-1]

    top = max(eigvals[0], 0.0)
    if np.any(eigvals < -NEGATIVE_EIG_TOL * top):
        _LOGGER.warning(
            "Projected pencil has eigenvalue %.3e below -%.0e * lambda_1; clamping",
            eigvals[-1],
            NEGATIVE_EIG_TOL,
        )
    sigma = np.sqrt(np.clip(eigvals, 0.0, None))

    V_hat = basis.Q @ eigvecs
    AV = AQ @ eigvecs
    # S-norms of the columns of A V_hat, read off the S-applied block
    s_norms = np.sqrt(np.clip(np.einsum("ij,ij->j", AV, SAQ @ eigvecs), 0.0, None))
    scalable = s_norms > PINV_RTOL * max(s_norms.max(), np.finfo(float).tiny)
    AV[:, scalable] /= s_norms[scalable]
    recovered = weighted_cholqr(AV, left)
    refinements[SLOT_LEFT] += recovered.refinements

    factors = GsvdFactors(
        U_hat=recovered.Q,
        sigma_hat=sigma,
        V_hat=V_hat,
        info={**_info(METHOD_GENEIG, cfg, cfg.ell, refinements), "retries": 0},
    )
    return _finish(factors, cfg)


def reconstruct(f: GsvdFactors, T) -> LinearOp:
    """Return U_hat diag(sigma_hat) V_hat^T T as a LinearOp."""
    return LowRankOperator(f.U_hat, f.sigma_hat, f.V_hat, as_spd_op(T))


def expected_matvec_counts(
    ell: int, q: int, refinements: dict[str, int] | None = None
) -> dict[str, int]:
    """Return the product counts of one rand_gsvd run with sketch width ell.

    Each refinement pass of a weighted QR adds ell products with its weight.
    """
    extra = Counter(refinements or {})
    return {
        "A.apply": (q + 1) * ell,
        "A.apply_transpose": (q + 1) * ell,
        "S.apply": (q + 1 + extra[SLOT_LEFT]) * ell,
        "S.solve": 0,
        "T.apply": (1 + extra[SLOT_RIGHT]) * ell,
        "T.solve": (q + 1 + extra[SLOT_RIGHT_INVERSE]) * ell,
    }


def observed_matvec_counts(A: LinearOp, S: SpdOp, T: SpdOp) -> dict[str, int]:
    """Collect counters in the layout of expected_matvec_counts."""
    return {
        "A.apply": A.matvec_counter.get("apply"),
        "A.apply_transpose": A.matvec_counter.get("apply_transpose"),
        "S.apply": S.matvec_counter.get("apply"),
        "S.solve": S.matvec_counter.get("solve"),
        "T.apply": T.matvec_counter.get("apply"),
        "T.solve": T.matvec_counter.get("solve"),
    }


GSVD_METHODS: dict[str, Callable[..., GsvdFactors]] = {
    METHOD_GSVD: rand_gsvd,
    METHOD_GSVD_TRANSPOSE: rand_gsvd_transpose,
    METHOD_TWO_SIDED: two_sided_gsvd,
    METHOD_GENEIG: gheig_gsvd,
}
