"""Random sketching matrices and sampling preconditioners.

Column j of every sketch is drawn from its own counter-based stream,
``Philox(SeedSequence(seed, spawn_key=(j,)))``, so a sketch depends only on
``(seed, j, n)`` and never on how many columns are drawn or in which order.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .const import (
    DEFAULT_DROP_TOL,
    ICHOL_INITIAL_SHIFT,
    INCOMPLETE_CHOLESKY_RETRIES,
    NORMAL_TRANSFORM,
    RNG_NAME,
    SAMPLER_GAUSSIAN,
    SAMPLER_PRECONDITIONED,
)
from .exceptions import ConfigError, DimensionError, NotPositiveDefiniteError
from .operator_interface import DenseMatrix
from .operators.dense import as_dense_matrix, as_spd_op

_LOGGER = logging.getLogger(__name__)


def column_generator(seed: int, column: int) -> np.random.Generator:
    """Return the generator that owns sketch column ``column``."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(column),)))
    )


def rng_metadata() -> dict[str, str]:
    """Describe the generator so a run can be reproduced elsewhere."""
    return {
        "rng": RNG_NAME,
        "rng_stream": "SeedSequence(seed, spawn_key=(column,))",
        "normal_transform": NORMAL_TRANSFORM,
        "numpy": np.__version__,
    }


def _check_sizes(n: int, ell: int) -> None:
    if n < 1 or ell < 1:
        raise DimensionError(f"sketch dimensions must be positive, got {n}x{ell}")


def draw_gaussian(n: int, ell: int, seed: int) -> DenseMatrix:
    """Return an n x ell matrix of independent standard normals."""
    _check_sizes(n, ell)
    sketch = np.empty((n, ell))
    for j in range(ell):
        sketch[:, j] = column_generator(seed, j).standard_normal(n)
    return sketch


class Preconditioner(ABC):
    """Sampling preconditioner L with L L^T approximating T^{-1}."""

    def __init__(self, n: int, label: str) -> None:
        self.n = int(n)
        self.label = label

    @abstractmethod
    def apply_L(self, x: DenseMatrix) -> DenseMatrix:
        """Return L x."""

    @abstractmethod
    def apply_Lt(self, x: DenseMatrix) -> DenseMatrix:
        """Return L^T x."""

    def to_dense(self) -> DenseMatrix:
        """Return L as a dense matrix."""
        return np.column_stack([self.apply_L(e) for e in np.eye(self.n)])


class DiagonalPreconditioner(Preconditioner):
    """L = diag(d)."""

    def __init__(self, diagonal: DenseMatrix, label: str = "diagonal") -> None:
        super().__init__(len(diagonal), label)
        self._diagonal = np.asarray(diagonal, dtype=np.float64)

    def apply_L(self, x: DenseMatrix) -> DenseMatrix:
        return self._diagonal * x

    def apply_Lt(self, x: DenseMatrix) -> DenseMatrix:
        return self._diagonal * x


class CholeskyPreconditioner(Preconditioner):
    """L = C^{-T} for a lower-triangular C with C C^T approximating T."""

    def __init__(self, factor: DenseMatrix, label: str = "cholesky") -> None:
        super().__init__(factor.shape[0], label)
        self._factor = factor

    def apply_L(self, x: DenseMatrix) -> DenseMatrix:
        return scipy.linalg.solve_triangular(self._factor, x, lower=True, trans="T")

    def apply_Lt(self, x: DenseMatrix) -> DenseMatrix:
        return scipy.linalg.solve_triangular(self._factor, x, lower=True)


class MatrixPreconditioner(Preconditioner):
    """User-supplied dense L."""

    def __init__(self, matrix, label: str = "user") -> None:
        dense = as_dense_matrix(matrix, "preconditioner")
        if dense.shape[0] != dense.shape[1]:
            raise DimensionError(f"preconditioner must be square, got {dense.shape}")
        super().__init__(dense.shape[0], label)
        self._matrix = dense

    def apply_L(self, x: DenseMatrix) -> DenseMatrix:
        return self._matrix @ x

    def apply_Lt(self, x: DenseMatrix) -> DenseMatrix:
        return self._matrix.T @ x

    def to_dense(self) -> DenseMatrix:
        return self._matrix.copy()


def jacobi_preconditioner(T) -> DiagonalPreconditioner:
    """L = diag(T)^{-1/2}."""
    diagonal = as_spd_op(T).diagonal()
    if np.any(diagonal <= 0):
        raise NotPositiveDefiniteError("weight has a non-positive diagonal entry")
    return DiagonalPreconditioner(1.0 / np.sqrt(diagonal), "jacobi")


def exact_preconditioner(T) -> CholeskyPreconditioner:
    """L = L_T^{-T} from the exact Cholesky factor, so L^T T L = I."""
    return CholeskyPreconditioner(as_spd_op(T).cholesky(), "exact")


def user_preconditioner(L) -> MatrixPreconditioner:
    """Wrap a caller-provided dense L."""
    return MatrixPreconditioner(L)


def _incomplete_cholesky(
    matrix: DenseMatrix, drop_tol: float, modified: bool
) -> DenseMatrix:
    """Threshold-dropping right-looking Cholesky of a dense matrix."""
    n = matrix.shape[0]
    work = matrix.copy()
    factor = np.zeros_like(matrix)
    # entries below drop_tol * ||matrix[j:, j]|| are discarded from column j
    thresholds = drop_tol * np.linalg.norm(np.tril(matrix), axis=0)

    for j in range(n):
        pivot = work[j, j]
        if not pivot > 0.0:
            raise NotPositiveDefiniteError(
                f"incomplete Cholesky broke down at pivot {j}", pivot=j
            )
        root = np.sqrt(pivot)
        factor[j, j] = root
        column = work[j + 1 :, j] / root
        kept = np.where(np.abs(column) >= thresholds[j], column, 0.0)
        factor[j + 1 :, j] = kept
        work[j + 1 :, j + 1 :] -= np.outer(kept, kept)
        if modified:
            # put the dropped part of the update on the diagonal so row sums match
            missing = column * column.sum() - kept * kept.sum()
            trailing = np.arange(j + 1, n)
            work[trailing, trailing] -= missing
    return factor


def incomplete_cholesky_preconditioner(
    T,
    drop_tol: float = DEFAULT_DROP_TOL,
    modified: bool = True,
    retry_count: int = INCOMPLETE_CHOLESKY_RETRIES,
) -> CholeskyPreconditioner:
    """Build L = C^{-T} from an incomplete Cholesky factor C of T.

    On breakdown the factorization is retried on T + alpha diag(T) with a
    growing shift alpha.

    Raises:
        ConfigError: If drop_tol is negative
        NotPositiveDefiniteError: If every attempt breaks down
    """
    if drop_tol < 0:
        raise ConfigError(f"must be non-negative, got {drop_tol}", "drop_tol")
    matrix = as_spd_op(T).to_dense()
    diagonal = np.diag(matrix).copy()
    shift = 0.0
    attempt = 0
    last_error: Optional[NotPositiveDefiniteError] = None

    while attempt < retry_count:
        attempt += 1
        shifted = matrix + shift * np.diag(diagonal) if shift else matrix
        try:
            factor = _incomplete_cholesky(shifted, drop_tol, modified)
        except NotPositiveDefiniteError as err:
            last_error = err
            shift = ICHOL_INITIAL_SHIFT if shift == 0.0 else 2.0 * shift
            _LOGGER.warning(
                "Incomplete Cholesky attempt %d/%d failed: %s. Retrying with shift %.1e",
                attempt,
                retry_count,
                err,
                shift,
            )
            continue
        _LOGGER.debug(
            "Incomplete Cholesky (drop_tol=%g, modified=%s, shift=%g) kept %d entries",
            drop_tol,
            modified,
            shift,
            int(np.count_nonzero(factor)),
        )
        return CholeskyPreconditioner(factor, "ichol")

    raise NotPositiveDefiniteError(
        f"incomplete Cholesky failed after {retry_count} attempts",
        pivot=last_error.pivot if last_error else None,
    ) from last_error


def preconditioned_condition_number(T, precond: Preconditioner) -> float:
    """Return kappa_2(L^T T L)."""
    weight = as_spd_op(T)
    if precond.n != weight.n:
        raise DimensionError(
            f"preconditioner dimension {precond.n} does not match weight {weight.n}"
        )
    L = precond.to_dense()
    product = L.T @ weight.to_dense() @ L
    eigvals = scipy.linalg.eigvalsh(0.5 * (product + product.T))
    return float(eigvals[-1] / eigvals[0])


def draw_preconditioned(
    n: int, ell: int, seed: int, precond: Preconditioner
) -> DenseMatrix:
    """Return L G for a Gaussian G drawn exactly as in draw_gaussian."""
    if precond.n != n:
        raise DimensionError(f"preconditioner dimension {precond.n} does not match {n}")
    gaussian = draw_gaussian(n, ell, seed)
    return np.column_stack([precond.apply_L(gaussian[:, j]) for j in range(ell)])


@dataclass(frozen=True)
class SamplerSpec:
    """How the sketch Omega is drawn."""

    kind: str = SAMPLER_GAUSSIAN
    seed: int = 0
    precond: Optional[Preconditioner] = None

    def __post_init__(self) -> None:
        if self.kind == SAMPLER_PRECONDITIONED and self.precond is None:
            raise ConfigError("preconditioned sampling needs a preconditioner", "precond")

    def with_seed(self, seed: int) -> "SamplerSpec":
        """Return the same spec with another seed."""
        return SamplerSpec(kind=self.kind, seed=seed, precond=self.precond)


class SamplerInterface(ABC):
    """Draws n x ell sketching matrices."""

    def __init__(self, spec: SamplerSpec) -> None:
        self.spec = spec

    @abstractmethod
    def draw(self, n: int, ell: int) -> DenseMatrix:
        """Return an n x ell sketch for the configured seed."""


class GaussianSampler(SamplerInterface):
    """Independent standard normal entries."""

    def draw(self, n: int, ell: int) -> DenseMatrix:
        return draw_gaussian(n, ell, self.spec.seed)


class PreconditionedSampler(SamplerInterface):
    """Gaussian columns mapped through a preconditioner L."""

    def draw(self, n: int, ell: int) -> DenseMatrix:
        return draw_preconditioned(n, ell, self.spec.seed, self.spec.precond)
