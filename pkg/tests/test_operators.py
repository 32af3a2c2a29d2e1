"""Tests for the operator interfaces and dense adapters."""

import numpy as np
import pytest

from stgsvd.exceptions import (
    ConfigError,
    DimensionError,
    NotPositiveDefiniteError,
    NotSymmetricError,
)
from stgsvd.operator_interface import SpdOp
from stgsvd.operators import (
    InexactOperator,
    InverseSpdOperator,
    LowRankOperator,
    TransposedOperator,
    dense_adapter,
    identity_weight,
    invert,
    read_matrix_market,
    spd_dense_adapter,
    weighted_norm,
    weighted_op_norm,
    weighted_op_norm_sqrt,
    write_matrix_market,
)
from stgsvd.testmatrices import make_minij


class _NegatedIdentity(SpdOp):
    """W = -I, which no Cholesky check has rejected."""

    def _apply(self, x):
        return -x

    def _solve(self, x):
        return -x


def test_dense_adapter_adjoint_consistency(rng):
    """Test y^T (M x) equals (M^T y)^T x on random probes."""
    M = rng.standard_normal((8, 6))
    op = dense_adapter(M)
    for _ in range(10):
        x, y = rng.standard_normal(6), rng.standard_normal(8)
        lhs = y @ op.apply(x)
        rhs = op.apply_transpose(y) @ x
        scale = np.linalg.norm(x) * np.linalg.norm(y) * np.linalg.norm(M)
        assert abs(lhs - rhs) <= 1e-13 * scale


def test_dense_adapter_rejects_bad_input():
    """Test empty and non-finite matrices are refused."""
    with pytest.raises(DimensionError):
        dense_adapter(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        dense_adapter(np.array([[1.0, np.nan]]))


def test_apply_checks_vector_length(rng):
    """Test a wrong-length vector raises DimensionError."""
    op = dense_adapter(rng.standard_normal((4, 3)))
    with pytest.raises(DimensionError):
        op.apply(np.ones(4))
    with pytest.raises(DimensionError):
        op.apply_transpose(np.ones(3))


def test_block_products_count_one_per_column(rng):
    """Test block products increment the counter once per column."""
    op = dense_adapter(rng.standard_normal((5, 4)))
    op.apply_block(rng.standard_normal((4, 3)))
    op.apply_transpose_block(rng.standard_normal((5, 2)))
    assert op.matvec_counter.get("apply") == 3
    assert op.matvec_counter.get("apply_transpose") == 2
    assert op.matvec_counter.get("solve") == 0


def test_fresh_counter_view_shares_data(rng):
    """Test with_fresh_counter keeps the matrix but zeroes the tallies."""
    M = rng.standard_normal((3, 3))
    op = dense_adapter(M)
    op.apply(np.ones(3))
    view = op.with_fresh_counter()
    assert view.matvec_counter.get("apply") == 0
    np.testing.assert_array_equal(view.apply(np.ones(3)), M @ np.ones(3))
    assert op.matvec_counter.get("apply") == 1


def test_spd_adapter_round_trip_minij(rng):
    """Test solve(apply(x)) returns x for the 4x4 minij matrix."""
    W = spd_dense_adapter(make_minij(4))
    for _ in range(5):
        x = rng.standard_normal(4)
        np.testing.assert_allclose(W.solve(W.apply(x)), x, atol=1e-12 * np.linalg.norm(x))


def test_spd_adapter_symmetrizes_roundoff():
    """Test asymmetry below the tolerance is accepted and removed."""
    W = make_minij(5)
    W[0, 1] += 1e-15
    op = spd_dense_adapter(W)
    np.testing.assert_array_equal(op.matrix, op.matrix.T)


def test_spd_adapter_rejects_asymmetric():
    """Test a visibly asymmetric matrix raises NotSymmetricError."""
    with pytest.raises(NotSymmetricError):
        spd_dense_adapter(np.array([[2.0, 1.0], [0.0, 2.0]]))


def test_spd_adapter_reports_failing_pivot():
    """Test an indefinite matrix reports the zero-based pivot."""
    with pytest.raises(NotPositiveDefiniteError) as excinfo:
        spd_dense_adapter(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert excinfo.value.pivot == 1


def test_spd_adapter_rejects_non_square():
    """Test a rectangular weight raises DimensionError."""
    with pytest.raises(DimensionError):
        spd_dense_adapter(np.ones((2, 3)))


def test_inverse_operator_swaps_apply_and_solve(rng):
    """Test W^{-1} applies through W.solve and is counted there."""
    W = spd_dense_adapter(make_minij(6))
    inverse = InverseSpdOperator(W)
    x = rng.standard_normal(6)
    np.testing.assert_allclose(inverse.apply(x), np.linalg.solve(make_minij(6), x), rtol=1e-10)
    np.testing.assert_allclose(inverse.solve(x), make_minij(6) @ x, rtol=1e-12)
    assert W.matvec_counter.get("solve") == 1
    assert W.matvec_counter.get("apply") == 1


def test_invert_unwraps_double_inverse():
    """Test invert(invert(W)) is W itself."""
    W = identity_weight(3)
    assert invert(invert(W)) is W


def test_transposed_operator(rng):
    """Test the transposed view swaps shape and products."""
    M = rng.standard_normal((5, 3))
    op = dense_adapter(M)
    view = TransposedOperator(op)
    assert view.shape == (3, 5)
    y = rng.standard_normal(5)
    np.testing.assert_allclose(view.apply(y), M.T @ y)
    assert op.matvec_counter.get("apply_transpose") == 1


def test_low_rank_operator_matches_dense_product(rng):
    """Test U diag(sigma) V^T T is applied without forming it."""
    U, V = rng.standard_normal((5, 2)), rng.standard_normal((4, 2))
    sigma = np.array([3.0, 1.0])
    T = make_minij(4)
    op = LowRankOperator(U, sigma, V, spd_dense_adapter(T))
    dense = (U * sigma) @ V.T @ T
    np.testing.assert_allclose(op.to_dense(), dense, rtol=1e-12, atol=1e-12)
    y = rng.standard_normal(5)
    np.testing.assert_allclose(op.apply_transpose(y), dense.T @ y, rtol=1e-12, atol=1e-12)


def test_low_rank_operator_rank_zero():
    """Test a rank-0 factorization is the zero operator."""
    op = LowRankOperator(np.zeros((3, 0)), np.zeros(0), np.zeros((2, 0)), identity_weight(2))
    np.testing.assert_array_equal(op.apply(np.ones(2)), np.zeros(3))


def test_low_rank_operator_rejects_inconsistent_factors():
    """Test mismatched factor shapes raise DimensionError."""
    with pytest.raises(DimensionError):
        LowRankOperator(np.zeros((3, 2)), np.zeros(1), np.zeros((2, 2)), identity_weight(2))


def test_weighted_norm(rng):
    """Test the weighted norm against x^T W x."""
    W = make_minij(5)
    x = rng.standard_normal(5)
    assert weighted_norm(x, W) == pytest.approx(np.sqrt(x @ W @ x), rel=1e-14)
    assert weighted_norm(x, np.eye(5)) == pytest.approx(np.linalg.norm(x), rel=1e-14)


def test_weighted_norm_rejects_indefinite_weight():
    """Test a negative x^T W x raises instead of reporting a zero norm."""
    with pytest.raises(NotPositiveDefiniteError):
        weighted_norm([3.0, 4.0], _NegatedIdentity(2))
    assert weighted_norm([0.0, 0.0], _NegatedIdentity(2)) == 0.0


def test_weighted_op_norm_two_routes(rng, make_spd):
    """Test the Cholesky and square-root routes agree and dominate sampled ratios."""
    A = rng.standard_normal((6, 5))
    S, T = make_spd(rng, 6, 50.0), make_spd(rng, 5, 50.0)
    value = weighted_op_norm(A, S, T)
    assert weighted_op_norm_sqrt(A, S, T) == pytest.approx(value, rel=1e-10)

    # directions uniform in the T geometry
    samples = np.linalg.solve(np.linalg.cholesky(T).T, rng.standard_normal((5, 10_000)))
    ratios = np.sqrt(np.einsum("ij,ij->j", A @ samples, S @ A @ samples)) / np.sqrt(
        np.einsum("ij,ij->j", samples, T @ samples)
    )
    assert ratios.max() <= value * (1 + 1e-10)
    assert ratios.max() >= 0.9 * value


def test_inexact_operator_zero_tolerance_is_exact(rng):
    """Test rel_tol = 0 returns the inner products unchanged."""
    M = rng.standard_normal((4, 4))
    noisy = InexactOperator(dense_adapter(M), 0.0, seed=3)
    x = rng.standard_normal(4)
    np.testing.assert_array_equal(noisy.apply(x), M @ x)


def test_inexact_operator_relative_error(rng):
    """Test each product carries a perturbation of the requested relative size."""
    M = rng.standard_normal((6, 6))
    noisy = InexactOperator(dense_adapter(M), 1e-3, seed=3)
    x = rng.standard_normal(6)
    exact = M @ x
    error = np.linalg.norm(noisy.apply(x) - exact) / np.linalg.norm(exact)
    assert error == pytest.approx(1e-3, rel=1e-9)


def test_inexact_operator_is_reproducible(rng):
    """Test a fresh view restarts the perturbation stream."""
    noisy = InexactOperator(dense_adapter(rng.standard_normal((3, 3))), 1e-2, seed=9)
    x = np.ones(3)
    first = noisy.apply(x)
    again = noisy.with_fresh_counter().apply(x)
    np.testing.assert_array_equal(first, again)


def test_inexact_operator_rejects_tolerance():
    """Test rel_tol outside [0, 1) raises ConfigError."""
    with pytest.raises(ConfigError):
        InexactOperator(dense_adapter(np.eye(2)), 1.0, seed=0)


def test_matrix_market_symmetric_file(tmp_path):
    """Test a symmetric Matrix Market file is read back expanded."""
    path = tmp_path / "minij.mtx"
    write_matrix_market(path, make_minij(4), comment="minij", symmetric=True)
    np.testing.assert_array_equal(read_matrix_market(path), make_minij(4))
