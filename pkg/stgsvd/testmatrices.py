"""Seeded generators for the experiment matrices and weights."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .const import (
    DEFAULT_DECAY_BASE,
    DEFAULT_DECAY_EXPONENT,
    DEFAULT_DENSITY,
    DEFAULT_GAP,
    DEFAULT_LOWRANK,
    DEFAULT_N,
    DEFAULT_NOISE_LEVEL,
    DEFAULT_RANDSVD_MODE,
    MATRIX_CONTROLLED_GAP,
    MATRIX_DECAY,
    MATRIX_LOWRANK_DECAY,
    MATRIX_LOWRANK_NOISE,
    RANK_RTOL,
    SUPPORTED_MATRICES,
)
from .exceptions import ConfigError
from .operator_interface import DenseMatrix

_LOGGER = logging.getLogger(__name__)

RANDSVD_MODES = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class TestMatrixSpec:
    """Parameters of one generated test matrix."""

    __test__ = False  # not a pytest class

    kind: str
    n: int = DEFAULT_N
    r: int = DEFAULT_LOWRANK
    seed: int = 0
    gap: float = DEFAULT_GAP
    noise: float = DEFAULT_NOISE_LEVEL
    exponent: float = DEFAULT_DECAY_EXPONENT
    base: float = DEFAULT_DECAY_BASE
    density: float = DEFAULT_DENSITY

    def validate(self) -> None:
        """Raise ConfigError on unusable parameters."""
        if self.kind not in SUPPORTED_MATRICES:
            raise ConfigError(f"unsupported matrix kind: {self.kind}", "kind")
        if self.n < 1:
            raise ConfigError(f"must be positive, got {self.n}", "n")
        if self.kind != MATRIX_DECAY and not (
            0 <= self.r <= self.n
        ):
            raise ConfigError(f"must lie in [0, n], got {self.r}", "r")
        if self.kind == MATRIX_CONTROLLED_GAP and not 0.0 < self.density <= 1.0:
            raise ConfigError(f"must lie in (0, 1], got {self.density}", "density")
        if self.kind == MATRIX_DECAY and not 0.0 < self.base < 1.0:
            raise ConfigError(f"must lie in (0, 1), got {self.base}", "base")


@dataclass
class GeneratedMatrix:
    """A generated matrix with its numerical rank."""

    matrix: DenseMatrix
    numerical_rank: int
    spec: TestMatrixSpec


def _generator(seed: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=stream))
    )


def numerical_rank(matrix: DenseMatrix, rtol: float = RANK_RTOL) -> int:
    """Count singular values above rtol * s_1."""
    values = scipy.linalg.svdvals(matrix)
    if values.shape[0] == 0 or values[0] == 0.0:
        return 0
    return int(np.count_nonzero(values > rtol * values[0]))


def _sparse_nonnegative(rng: np.random.Generator, n: int, nnz: int) -> DenseMatrix:
    vec = np.zeros(n)
    vec[rng.choice(n, size=nnz, replace=False)] = rng.random(nnz)
    return vec


def _controlled_gap(spec: TestMatrixSpec) -> DenseMatrix:
    # sum_j c_j x_j y_j^T with c_j = gap / j for j <= r and 1 / j beyond;
    # x_j and y_j are independent sparse nonnegative vectors
    n = spec.n
    nnz = max(1, int(round(spec.density * n)))
    rng_x, rng_y = _generator(spec.seed, 0), _generator(spec.seed, 1)
    X = np.column_stack([_sparse_nonnegative(rng_x, n, nnz) for _ in range(n)])
    Y = np.column_stack([_sparse_nonnegative(rng_y, n, nnz) for _ in range(n)])
    weights = 1.0 / np.arange(1, n + 1)
    weights[: spec.r] *= spec.gap
    return (X * weights) @ Y.T


def _lowrank_noise(spec: TestMatrixSpec) -> DenseMatrix:
    n, r = spec.n, spec.r
    noise = _generator(spec.seed, 2).standard_normal((n, n))
    matrix = np.sqrt(spec.noise * r / (2.0 * n**2)) * (noise + noise.T)
    matrix[:r, :r] += np.eye(r)
    return matrix


def _lowrank_decay(spec: TestMatrixSpec) -> DenseMatrix:
    n, r = spec.n, spec.r
    tail = np.arange(2, n - r + 2, dtype=float) ** (-spec.exponent)
    return np.diag(np.concatenate([np.ones(r), tail]))


def _decay(spec: TestMatrixSpec) -> DenseMatrix:
    return np.diag(spec.base ** np.arange(1, spec.n + 1, dtype=float))


_BUILDERS = {
    MATRIX_CONTROLLED_GAP: _controlled_gap,
    MATRIX_LOWRANK_NOISE: _lowrank_noise,
    MATRIX_LOWRANK_DECAY: _lowrank_decay,
    MATRIX_DECAY: _decay,
}


def generate(spec: TestMatrixSpec) -> GeneratedMatrix:
    """Build the matrix described by ``spec`` and report its numerical rank."""
    spec.validate()
    matrix = _BUILDERS[spec.kind](spec)
    rank = numerical_rank(matrix)
    _LOGGER.debug("Generated %s (n=%d, seed=%d), rank %d", spec.kind, spec.n, spec.seed, rank)
    return GeneratedMatrix(matrix=matrix, numerical_rank=rank, spec=spec)


def make_test_matrix(spec: TestMatrixSpec) -> DenseMatrix:
    """Return the dense matrix described by ``spec``."""
    return generate(spec).matrix


def make_minij(n: int) -> DenseMatrix:
    """Return the SPD matrix with entries min(i, j), 1-based."""
    if n < 1:
        raise ConfigError(f"must be positive, got {n}", "n")
    index = np.arange(1, n + 1, dtype=float)
    return np.minimum.outer(index, index)


def randsvd_spectrum(n: int, kappa: float, mode: int, seed: int = 0) -> DenseMatrix:
    """Return eigenvalues in [1/kappa, 1] shaped like MATLAB's randsvd modes.

    Mode 1: one large, 2: one small, 3: geometric, 4: arithmetic,
    5: random with uniformly distributed logarithm (endpoints pinned).
    """
    if mode not in RANDSVD_MODES:
        raise ConfigError(f"must be one of {RANDSVD_MODES}, got {mode}", "mode")
    if n == 1:
        return np.ones(1)
    if mode == 1:
        values = np.full(n, 1.0 / kappa)
        values[0] = 1.0
    elif mode == 2:
        values = np.ones(n)
        values[-1] = 1.0 / kappa
    elif mode == 3:
        values = kappa ** (-np.arange(n) / (n - 1))
    elif mode == 4:
        values = 1.0 - (1.0 - 1.0 / kappa) * np.arange(n) / (n - 1)
    else:
        values = np.exp(-np.log(kappa) * _generator(seed, 4).random(n))
        values[0], values[-1] = 1.0, 1.0 / kappa
    return values


def make_randsvd_spd(
    n: int, kappa: float, mode: int = DEFAULT_RANDSVD_MODE, seed: int = 0
) -> DenseMatrix:
    """Return Q diag(d) Q^T for a Haar-random orthogonal Q and a randsvd spectrum.

    kappa = 1 gives the identity up to rounding.
    """
    if n < 1:
        raise ConfigError(f"must be positive, got {n}", "n")
    if kappa < 1.0:
        raise ConfigError(f"must be at least 1, got {kappa}", "kappa")
    Q, R = scipy.linalg.qr(_generator(seed, 3).standard_normal((n, n)))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    Q = Q * signs
    spectrum = randsvd_spectrum(n, kappa, mode, seed)
    matrix = (Q * spectrum) @ Q.T
    return 0.5 * (matrix + matrix.T)
