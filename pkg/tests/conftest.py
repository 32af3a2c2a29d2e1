"""Shared fixtures for the stgsvd test suite."""

import numpy as np
import pytest

from stgsvd.const import DEFAULT_WEIGHT_SEED
from stgsvd.operators import dense_adapter, spd_dense_adapter
from stgsvd.testmatrices import make_minij, make_randsvd_spd


def _random_spd(rng: np.random.Generator, n: int, kappa: float) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    spectrum = np.logspace(0.0, -np.log10(kappa), n)
    matrix = (Q * spectrum) @ Q.T
    return 0.5 * (matrix + matrix.T)


def _low_rank(rng: np.random.Generator, m: int, n: int, rank: int) -> np.ndarray:
    return rng.standard_normal((m, rank)) @ rng.standard_normal((rank, n))


@pytest.fixture
def rng():
    """Return a seeded generator."""
    return np.random.default_rng(20240517)


@pytest.fixture
def make_spd():
    """Return a factory for random SPD matrices with a given condition number."""
    return _random_spd


@pytest.fixture
def make_low_rank():
    """Return a factory for random matrices of exact rank."""
    return _low_rank


@pytest.fixture
def small_problem(rng):
    """Return an 8x6 matrix with S (kappa 10) and T (kappa 100)."""
    A = rng.standard_normal((8, 6))
    S = _random_spd(rng, 8, 10.0)
    T = _random_spd(rng, 6, 100.0)
    return A, S, T


@pytest.fixture
def weighted_problem(rng):
    """Return a 40x30 matrix with a decaying spectrum and experiment-style weights."""
    left, _ = np.linalg.qr(rng.standard_normal((40, 30)))
    right, _ = np.linalg.qr(rng.standard_normal((30, 30)))
    A = (left * 0.8 ** np.arange(30)) @ right.T
    S = make_minij(40)
    T = make_randsvd_spd(30, 1e4, seed=DEFAULT_WEIGHT_SEED)
    return A, S, T


@pytest.fixture
def operators(weighted_problem):
    """Return the weighted problem wrapped as counted operators."""
    A, S, T = weighted_problem
    return dense_adapter(A), spd_dense_adapter(S), spd_dense_adapter(T)
