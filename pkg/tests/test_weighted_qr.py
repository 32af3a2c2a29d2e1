"""Tests for the weighted Cholesky QR."""

import numpy as np
import pytest

from stgsvd.exceptions import DimensionError, NumericalFailure, RankDeficiencyError
from stgsvd.operator_interface import SpdOp
from stgsvd.operators import spd_dense_adapter
from stgsvd.testmatrices import make_minij
from stgsvd.weighted_qr import (
    WeightedQrResult,
    orthogonality_residual,
    reorthogonalize,
    weighted_cholqr,
)


class _SemidefiniteWeight(SpdOp):
    """diag(d) with some zero entries; solve is never used."""

    def __init__(self, diagonal):
        super().__init__(len(diagonal))
        self._diagonal = np.asarray(diagonal, dtype=float)

    def _apply(self, x):
        return self._diagonal * x

    def _solve(self, x):
        raise NotImplementedError


def _weighted_mgs(Z, W):
    """Modified Gram-Schmidt in the W inner product."""
    Q = Z.astype(float).copy()
    n = Z.shape[1]
    R = np.zeros((n, n))
    for j in range(n):
        for i in range(j):
            R[i, j] = Q[:, i] @ W @ Q[:, j]
            Q[:, j] -= R[i, j] * Q[:, i]
        R[j, j] = np.sqrt(Q[:, j] @ W @ Q[:, j])
        Q[:, j] /= R[j, j]
    return Q, R


def test_minij_weight_against_gram_schmidt(rng):
    """Test Q^T W Q = I, QR = Z and agreement with weighted Gram-Schmidt."""
    W = make_minij(10)
    Z = rng.standard_normal((10, 4))
    res = weighted_cholqr(Z, W)

    assert np.linalg.norm(res.Q.T @ W @ res.Q - np.eye(4), 2) <= 1e-11
    assert np.linalg.norm(res.Q @ res.R - Z) <= 1e-12 * np.linalg.norm(Z)
    np.testing.assert_array_equal(res.R, np.triu(res.R))
    assert np.all(np.diag(res.R) > 0)

    Q_ref, R_ref = _weighted_mgs(Z, W)
    np.testing.assert_allclose(res.R, R_ref, rtol=1e-9, atol=1e-9 * np.abs(R_ref).max())
    np.testing.assert_allclose(res.Q, Q_ref, atol=1e-9)


def test_weighted_product_comes_for_free(rng):
    """Test WQ matches W @ Q and costs no extra applies."""
    W = spd_dense_adapter(make_minij(12))
    res = weighted_cholqr(rng.standard_normal((12, 5)), W, want_wq=True)
    expected = W.to_dense() @ res.Q
    assert np.linalg.norm(res.WQ - expected) <= 1e-10 * np.linalg.norm(expected)
    assert W.matvec_counter.get("apply") == 5 * (1 + res.refinements)


def test_wq_omitted_by_default(rng):
    """Test WQ is None unless requested."""
    assert weighted_cholqr(rng.standard_normal((5, 2)), np.eye(5)).WQ is None


def test_ill_conditioned_weights(rng, make_spd):
    """Test W-orthogonality for kappa(W) = 1e6 and kappa(Z) up to 1e6."""
    for _ in range(20):
        W = make_spd(rng, 40, 1e6)
        U, _ = np.linalg.qr(rng.standard_normal((40, 8)))
        V, _ = np.linalg.qr(rng.standard_normal((8, 8)))
        Z = (U * np.logspace(0, -6, 8)) @ V.T
        res = weighted_cholqr(Z, W)
        assert orthogonality_residual(res.Q, W) <= 1e-8
        assert np.linalg.norm(res.Q @ res.R - Z) <= 1e-12 * np.linalg.norm(Z)


def test_ill_conditioned_block_identity_weight(rng):
    """Test kappa(Z) = 1e8 with W = I stays orthonormal in one pass."""
    U, _ = np.linalg.qr(rng.standard_normal((30, 6)))
    V, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    Z = (U * np.logspace(0, -8, 6)) @ V.T
    res = weighted_cholqr(Z, np.eye(30))
    assert res.refinements == 0
    assert orthogonality_residual(res.Q, np.eye(30)) <= 1e-12


def test_range_is_preserved(rng):
    """Test the W-orthogonal projector onto range(Q) leaves Z unchanged."""
    W = make_minij(15)
    Z = rng.standard_normal((15, 5))
    Q = weighted_cholqr(Z, W).Q
    projected = Q @ np.linalg.solve(Q.T @ W @ Q, Q.T @ W @ Z)
    assert np.linalg.norm(Z - projected) <= 1e-10 * np.linalg.norm(Z)


def test_refinement_pass_fires_on_bad_gram(caplog):
    """Test a Gram matrix with condition 1e10 triggers one refinement."""
    W = spd_dense_adapter(np.diag([1.0, 1e-10, 1.0, 1.0, 1.0, 1.0]))
    Z = np.eye(6)[:, :2] @ np.array([[1.0, 0.5], [0.0, 1.0]])
    res = weighted_cholqr(Z, W)
    assert res.refinements == 1
    assert W.matvec_counter.get("apply") == 4
    assert orthogonality_residual(res.Q, W) <= 1e-10
    assert "refining" in caplog.text


def test_refinement_can_be_disabled():
    """Test refine=False skips the second pass."""
    W = np.diag([1.0, 1e-10, 1.0, 1.0])
    Z = np.eye(4)[:, :2]
    assert weighted_cholqr(Z, W, refine=False).refinements == 0


def test_reorthogonalize_composes_factors(rng, make_spd):
    """Test another pass keeps QR = Z and reduces the residual."""
    W = make_spd(rng, 20, 100.0)
    Z = rng.standard_normal((20, 4))
    crude = WeightedQrResult(Q=Z.copy(), R=np.eye(4))
    again = reorthogonalize(crude, W)
    assert np.linalg.norm(again.Q @ again.R - Z) <= 1e-12 * np.linalg.norm(Z)
    assert orthogonality_residual(again.Q, W) < orthogonality_residual(Z, W)
    assert orthogonality_residual(again.Q, W) <= 1e-12
    assert again.refinements == 1


def test_reorthogonalize_fixed_point(rng):
    """Test an orthonormal factor is returned unchanged up to rounding."""
    W = make_minij(8)
    first = weighted_cholqr(rng.standard_normal((8, 3)), W)
    again = reorthogonalize(first, W)
    np.testing.assert_allclose(again.Q, first.Q, atol=1e-12)
    np.testing.assert_allclose(again.R, first.R, rtol=1e-12, atol=1e-12)


def test_gram_breakdown_reports_column():
    """Test a singular Gram matrix raises RankDeficiencyError with its column."""
    W = _SemidefiniteWeight([1.0, 0.0, 1.0, 1.0])
    Z = np.eye(4)[:, :2]
    with pytest.raises(RankDeficiencyError) as excinfo:
        weighted_cholqr(Z, W)
    assert excinfo.value.column == 1


def test_shape_errors(rng):
    """Test n > m and row mismatches raise DimensionError."""
    with pytest.raises(DimensionError):
        weighted_cholqr(rng.standard_normal((3, 4)), np.eye(3))
    with pytest.raises(DimensionError):
        weighted_cholqr(rng.standard_normal((5, 2)), np.eye(4))


def test_non_finite_block():
    """Test NaN input raises NumericalFailure, a GsvdError."""
    Z = np.ones((3, 1))
    Z[0, 0] = np.nan
    with pytest.raises(NumericalFailure):
        weighted_cholqr(Z, np.eye(3))
