"""Tests for the randomized (S,T)-GSVD drivers."""

import importlib

import numpy as np
import pytest

from stgsvd.analysis import projection_error
from stgsvd.exceptions import ConfigError, DimensionError, RankDeficiencyError
from stgsvd.operators import (
    InexactOperator,
    dense_adapter,
    spd_dense_adapter,
    weighted_op_norm,
)
from stgsvd.rand_gsvd import (
    GSVD_METHODS,
    SketchConfig,
    expected_matvec_counts,
    gheig_gsvd,
    observed_matvec_counts,
    rand_gsvd,
    rand_gsvd_transpose,
    rand_subspace,
    reconstruct,
    two_sided_gsvd,
)
from stgsvd.reference import exact_gsvd
from stgsvd.sampling import SamplerSpec, draw_gaussian

# The package re-exports the rand_gsvd function, which shadows the submodule attribute.
rand_gsvd_module = importlib.import_module("stgsvd.rand_gsvd")


def _orthonormality(X, W):
    return np.linalg.norm(X.T @ W @ X - np.eye(X.shape[1]), 2)


def test_diagonal_identity_weights():
    """Test diag(3, 2, 1) with identity weights is recovered exactly."""
    A = np.diag([3.0, 2.0, 1.0])
    f = rand_gsvd(A, np.eye(3), np.eye(3), SketchConfig(k=3, p=0))
    np.testing.assert_allclose(f.sigma_hat, [3.0, 2.0, 1.0], rtol=1e-12)
    np.testing.assert_allclose(np.abs(f.U_hat), np.eye(3), atol=1e-12)
    np.testing.assert_allclose(np.abs(f.V_hat), np.eye(3), atol=1e-12)


def test_full_sketch_matches_oracle(small_problem):
    """Test ell = min(m, n) reproduces the exact generalized singular values."""
    A, S, T = small_problem
    f = rand_gsvd(A, S, T, SketchConfig(k=6, p=0, q=2))
    truth = exact_gsvd(A, S, T)
    np.testing.assert_allclose(f.sigma_hat, truth.sigma, rtol=1e-10)


def test_subspace_captures_low_rank_range(rng, make_low_rank):
    """Test q = 0 captures the range of a rank-3 matrix."""
    A = make_low_rank(rng, 8, 8, 3)
    Q = rand_subspace(A, np.eye(8), np.eye(8), draw_gaussian(8, 5, seed=0), q=0)
    assert np.linalg.norm(A - Q @ Q.T @ A, 2) <= 1e-12 * np.linalg.norm(A, 2)


def test_subspace_is_s_orthonormal(weighted_problem):
    """Test the range basis is S-orthonormal after power iterations."""
    A, S, T = weighted_problem
    Q = rand_subspace(A, S, T, draw_gaussian(30, 12, seed=4), q=2)
    assert Q.shape == (40, 12)
    assert _orthonormality(Q, S) <= 1e-10


def test_subspace_rejects_negative_q(weighted_problem):
    """Test a negative iteration count raises ConfigError."""
    A, S, T = weighted_problem
    with pytest.raises(ConfigError):
        rand_subspace(A, S, T, draw_gaussian(30, 4, seed=0), q=-1)


@pytest.mark.parametrize("rank", [1, 5, 15])
def test_exact_rank_recovery(rng, make_low_rank, make_spd, rank):
    """Test rank-k matrices are recovered to rounding for every seed."""
    A = make_low_rank(rng, 40, 30, rank)
    S, T = make_spd(rng, 40, 100.0), make_spd(rng, 30, 100.0)
    sigma_1 = exact_gsvd(A, S, T).sigma[0]
    for seed in range(10):
        f = rand_gsvd(A, S, T, SketchConfig(k=rank, p=2, sampler=SamplerSpec(seed=seed)))
        assert projection_error(A, S, T, f) <= 1e-11 * sigma_1


@pytest.mark.parametrize("method", sorted(GSVD_METHODS))
def test_every_route_is_weight_orthonormal(weighted_problem, method):
    """Test U_hat is S-orthonormal and V_hat is T-orthonormal for every route."""
    A, S, T = weighted_problem
    f = GSVD_METHODS[method](A, S, T, SketchConfig(k=8, p=6, q=1))
    assert f.rank == 8
    assert _orthonormality(f.U_hat, S) <= 1e-10
    assert _orthonormality(f.V_hat, T) <= 1e-10
    assert np.all(np.diff(f.sigma_hat) <= 0)
    assert np.all(f.sigma_hat >= 0)
    assert f.info["method"] == method


@pytest.mark.parametrize("method", sorted(GSVD_METHODS))
def test_every_route_is_dominated_by_exact_values(weighted_problem, method):
    """Test sigma_hat_j never exceeds sigma_j by more than 1e-9 sigma_1."""
    A, S, T = weighted_problem
    sigma = exact_gsvd(A, S, T).sigma
    f = GSVD_METHODS[method](A, S, T, SketchConfig(k=8, p=6, q=1))
    assert np.all(f.sigma_hat <= sigma[: f.rank] + 1e-9 * sigma[0])


def test_geneig_left_vectors_are_s_normalized_products(small_problem):
    """Test U_hat equals A V_hat with columns scaled to unit S-norm."""
    A, S, T = small_problem
    f = gheig_gsvd(A, S, T, SketchConfig(k=6, p=0))
    AV = A @ f.V_hat
    AV /= np.sqrt(np.einsum("ij,ij->j", AV, S @ AV))
    np.testing.assert_allclose(f.U_hat, AV, atol=1e-8)


def test_transpose_route_matches_oracle(small_problem):
    """Test the transpose route recovers all values when ell = min(m, n)."""
    A, S, T = small_problem
    f = rand_gsvd_transpose(A, S, T, SketchConfig(k=6, p=0, q=1))
    np.testing.assert_allclose(f.sigma_hat, exact_gsvd(A, S, T).sigma, rtol=1e-10)


def test_transpose_route_uses_s_solves(weighted_problem):
    """Test the transpose route works with S^{-1} and counts S solves."""
    A, S, T = weighted_problem
    ops = dense_adapter(A), spd_dense_adapter(S), spd_dense_adapter(T)
    rand_gsvd_transpose(*ops, SketchConfig(k=5, p=5))
    counts = observed_matvec_counts(*ops)
    assert counts["S.solve"] > 0
    assert counts["A.apply_transpose"] == counts["A.apply"] == 10


def test_two_sided_recovers_low_rank(rng, make_low_rank, make_spd):
    """Test the two-sided sketch is exact when ell covers the rank."""
    A = make_low_rank(rng, 20, 15, 4)
    S, T = make_spd(rng, 20, 10.0), make_spd(rng, 15, 10.0)
    f = two_sided_gsvd(A, S, T, SketchConfig(k=4, p=3))
    np.testing.assert_allclose(f.sigma_hat, exact_gsvd(A, S, T).sigma[:4], rtol=1e-10)


def test_gheig_recovers_low_rank(rng, make_low_rank, make_spd):
    """Test the eigenproblem route at ell = rank, with the looser tolerance of squaring."""
    A = make_low_rank(rng, 20, 15, 4)
    S, T = make_spd(rng, 20, 10.0), make_spd(rng, 15, 10.0)
    f = gheig_gsvd(A, S, T, SketchConfig(k=4, p=0))
    truth = exact_gsvd(A, S, T).sigma
    np.testing.assert_allclose(f.sigma_hat, truth[:4], rtol=0, atol=1e-8 * truth[0])


def test_table1_counts_identity_weights(rng):
    """Test the product counts of rand_gsvd for several q."""
    A = rng.standard_normal((30, 25))
    for q in range(3):
        ops = dense_adapter(A), spd_dense_adapter(np.eye(30)), spd_dense_adapter(np.eye(25))
        f = rand_gsvd(*ops, SketchConfig(k=6, p=4, q=q))
        assert sum(f.info["refinements"].values()) == 0
        assert observed_matvec_counts(*ops) == expected_matvec_counts(10, q)


def test_table1_counts_with_refinements(operators):
    """Test the counts match once refinement passes are accounted for."""
    A, S, T = operators
    f = rand_gsvd(A, S, T, SketchConfig(k=8, p=6, q=2))
    expected = expected_matvec_counts(14, 2, f.info["refinements"])
    assert observed_matvec_counts(A, S, T) == expected
    assert expected["S.solve"] == 0


def test_truncation(weighted_problem):
    """Test truncate=False keeps ell triplets and truncate(k) keeps k."""
    A, S, T = weighted_problem
    full = rand_gsvd(A, S, T, SketchConfig(k=5, p=5, truncate=False))
    assert full.rank == 10
    short = full.truncate(5)
    assert short.rank == 5
    assert short.info["truncated_to"] == 5
    np.testing.assert_array_equal(short.sigma_hat, full.sigma_hat[:5])
    assert full.truncate(20) is full


def test_sketch_config_validation(weighted_problem):
    """Test k + p above min(m, n) names the offending field."""
    A, S, T = weighted_problem
    with pytest.raises(ConfigError) as excinfo:
        rand_gsvd(A, S, T, SketchConfig(k=25, p=10))
    assert excinfo.value.field == "ell"
    with pytest.raises(ConfigError):
        SketchConfig(k=0).validate(5, 5)


def test_weight_dimension_mismatch(weighted_problem):
    """Test weights of the wrong size raise DimensionError."""
    A, S, _ = weighted_problem
    with pytest.raises(DimensionError):
        rand_gsvd(A, S, np.eye(29), SketchConfig(k=2))


def test_seed_determinism(weighted_problem):
    """Test identical seeds give bit-identical factors."""
    A, S, T = weighted_problem
    cfg = SketchConfig(k=5, q=1, sampler=SamplerSpec(seed=3))
    first, second = rand_gsvd(A, S, T, cfg), rand_gsvd(A, S, T, cfg)
    np.testing.assert_array_equal(first.sigma_hat, second.sigma_hat)
    np.testing.assert_array_equal(first.U_hat, second.U_hat)


def test_zero_tolerance_inexact_operator_is_exact(operators):
    """Test rel_tol = 0 reproduces the exact-product factors."""
    A, S, T = operators
    cfg = SketchConfig(k=5, q=1)
    exact = rand_gsvd(A.with_fresh_counter(), S, T, cfg)
    noisy = rand_gsvd(InexactOperator(A.with_fresh_counter(), 0.0, seed=1), S, T, cfg)
    np.testing.assert_array_equal(exact.sigma_hat, noisy.sigma_hat)


def test_rank_breakdown_drops_a_sketch_column(monkeypatch, weighted_problem):
    """Test a Gram breakdown is retried with one column fewer."""
    A, S, T = weighted_problem
    real = rand_gsvd_module.weighted_cholqr
    calls = {"count": 0}

    def flaky(Z, W, **kwargs):
        calls["count"] += 1
        if calls["count"] == 1:
            raise RankDeficiencyError("forced", column=Z.shape[1] - 1)
        return real(Z, W, **kwargs)

    monkeypatch.setattr(rand_gsvd_module, "weighted_cholqr", flaky)
    f = rand_gsvd(A, S, T, SketchConfig(k=3, p=3, truncate=False))
    assert f.info["retries"] == 1
    assert f.info["ell"] == 5
    assert f.rank == 5


def test_rank_breakdown_gives_up(monkeypatch, weighted_problem):
    """Test a persistent breakdown re-raises with the failing iteration."""
    A, S, T = weighted_problem
    real = rand_gsvd_module.weighted_cholqr
    calls = {"count": 0}

    def broken(Z, W, **kwargs):
        calls["count"] += 1
        if calls["count"] % 2 == 0:
            raise RankDeficiencyError("forced", column=0)
        return real(Z, W, **kwargs)

    monkeypatch.setattr(rand_gsvd_module, "weighted_cholqr", broken)
    with pytest.raises(RankDeficiencyError) as excinfo:
        rand_gsvd(A, S, T, SketchConfig(k=3, p=10, q=1))
    assert excinfo.value.iteration == 0


def test_reconstruct_exact_and_truncated(small_problem):
    """Test reconstruction from oracle factors, full and truncated."""
    A, S, T = small_problem
    truth = exact_gsvd(A, S, T)
    full = reconstruct(truth.as_factors(), T).to_dense()
    assert weighted_op_norm(A - full, S, T) <= 1e-12 * truth.sigma[0]

    truncated = reconstruct(truth.as_factors(3), T).to_dense()
    assert weighted_op_norm(A - truncated, S, T) == pytest.approx(truth.sigma[3], rel=1e-10)
