"""Unit tests for the weighted linear algebra kernels."""

import numpy as np
import pytest

from tdb_sparse.linalg import (
    LinalgError,
    RankDeficiencyError,
    jacobi_svd,
    lu_solve_checked,
    pivoted_qr,
    reorthonormalize,
    sym_eig,
    truncated_svd_weighted,
    weighted_frobenius,
    weighted_inner,
)
from tdb_sparse.models.state import QuadratureWeights


def random_weights(n: int, s: int, seed: int = 0) -> QuadratureWeights:
    rng = np.random.default_rng(seed)
    wx = rng.uniform(0.5, 2.0, n) / n
    wxi = rng.uniform(0.5, 2.0, s)
    return QuadratureWeights(wx=wx, wxi=wxi / wxi.sum())


class TestWeightedInner:
    """Tests for weighted inner products and norms."""

    def test_matches_dense_formula(self) -> None:
        """Test Aᵀ diag(w) B against the explicit product."""
        rng = np.random.default_rng(1)
        A, B, w = rng.normal(size=(7, 3)), rng.normal(size=(7, 2)), rng.uniform(1, 2, 7)
        np.testing.assert_allclose(weighted_inner(A, B, w), A.T @ np.diag(w) @ B, atol=1e-14)

    def test_dimension_mismatch(self) -> None:
        """Test mismatched row counts are rejected."""
        with pytest.raises(LinalgError):
            weighted_inner(np.ones((4, 2)), np.ones((5, 2)), np.ones(4))

    def test_weighted_frobenius(self) -> None:
        """Test the weighted Frobenius norm of a constant matrix."""
        weights = QuadratureWeights.monte_carlo(np.full(4, 0.25), 8)
        assert weighted_frobenius(np.full((4, 8), 3.0), weights) == pytest.approx(3.0)


class TestPivotedQR:
    """Tests for Householder QR with column pivoting."""

    def test_reconstructs_permuted_matrix(self) -> None:
        """Test M[:, pivot] = Q R with orthonormal Q and non-increasing |diag(R)|."""
        M = np.random.default_rng(2).normal(size=(9, 5))
        Q, R, pivot = pivoted_qr(M)
        np.testing.assert_allclose(Q @ R, M[:, pivot], atol=1e-12)
        np.testing.assert_allclose(Q.T @ Q, np.eye(5), atol=1e-12)
        diag = np.abs(np.diag(R))
        assert np.all(diag[:-1] >= diag[1:] - 1e-12)

    def test_identity_pivots_in_order(self) -> None:
        """Test ties are broken by the lowest index."""
        _, _, pivot = pivoted_qr(np.eye(3))
        assert pivot.tolist() == [0, 1, 2]

    def test_rank_deficient_input(self) -> None:
        """Test a rank-2 matrix yields a zero trailing diagonal."""
        rng = np.random.default_rng(3)
        M = rng.normal(size=(6, 2)) @ rng.normal(size=(2, 4))
        _, R, _ = pivoted_qr(M)
        assert abs(R[2, 2]) < 1e-12 * abs(R[0, 0])


class TestSymEig:
    """Tests for the Jacobi symmetric eigensolver."""

    def test_against_numpy(self) -> None:
        """Test eigenvalues agree with numpy and vectors diagonalize C."""
        A = np.random.default_rng(4).normal(size=(12, 12))
        C = A + A.T
        Psi, lam = sym_eig(C)
        np.testing.assert_allclose(lam, np.sort(np.linalg.eigvalsh(C))[::-1], atol=1e-10)
        np.testing.assert_allclose(C @ Psi, Psi * lam, atol=1e-10)
        np.testing.assert_allclose(Psi.T @ Psi, np.eye(12), atol=1e-12)

    def test_largest_entry_positive(self) -> None:
        """Test the sign convention of the eigenvectors."""
        Psi, _ = sym_eig(np.array([[2.0, 1.0], [1.0, 2.0]]))
        peak = np.argmax(np.abs(Psi), axis=0)
        assert np.all(Psi[peak, np.arange(2)] > 0)

    def test_rejects_nonsymmetric(self) -> None:
        """Test a non-symmetric matrix raises."""
        with pytest.raises(LinalgError, match="not symmetric"):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_one_by_one(self) -> None:
        """Test the trivial case."""
        Psi, lam = sym_eig(np.array([[5.0]]))
        assert Psi.tolist() == [[1.0]]
        assert lam.tolist() == [5.0]


class TestJacobiSVD:
    """Tests for the one-sided Jacobi SVD."""

    def test_reconstruction(self) -> None:
        """Test L diag(sigma) Rᵀ reproduces the matrix."""
        M = np.random.default_rng(5).normal(size=(8, 4))
        L, sigma, R = jacobi_svd(M)
        np.testing.assert_allclose(L @ np.diag(sigma) @ R.T, M, atol=1e-12)
        np.testing.assert_allclose(sigma, np.linalg.svd(M, compute_uv=False), rtol=1e-12)

    def test_graded_singular_values(self) -> None:
        """Test small singular values keep relative accuracy."""
        sigma = jacobi_svd(np.diag([1.0, 1e-6, 1e-12]))[1]
        np.testing.assert_allclose(sigma, [1.0, 1e-6, 1e-12], rtol=1e-12)


class TestReorthonormalize:
    """Tests for weighted Gram-Schmidt."""

    def test_orthonormal_and_factor(self) -> None:
        """Test U = U' T with U'ᵀ W U' = I."""
        rng = np.random.default_rng(6)
        U, w = rng.normal(size=(20, 4)), rng.uniform(0.5, 1.5, 20)
        Q, T = reorthonormalize(U, w)
        np.testing.assert_allclose(Q.T @ (w[:, None] * Q), np.eye(4), atol=1e-13)
        np.testing.assert_allclose(Q @ T, U, atol=1e-12)
        assert np.allclose(T, np.triu(T))

    def test_names_dependent_column(self) -> None:
        """Test a repeated column is reported with its index."""
        U = np.random.default_rng(7).normal(size=(10, 2))
        U = np.column_stack([U, U[:, 0]])
        with pytest.raises(RankDeficiencyError) as info:
            reorthonormalize(U, np.ones(10))
        assert info.value.column == 2
        assert info.value.achievable == 2


class TestTruncatedSVD:
    """Tests for the weighted truncated SVD."""

    def test_exact_low_rank_recovery(self) -> None:
        """Test an exactly rank-3 matrix is reproduced at r=3."""
        rng = np.random.default_rng(8)
        weights = random_weights(30, 12)
        V = rng.normal(size=(30, 3)) @ rng.normal(size=(3, 12))
        U, Sigma, Y = truncated_svd_weighted(V, weights, 3)
        np.testing.assert_allclose(U @ Sigma @ Y.T, V, atol=1e-10)
        np.testing.assert_allclose(weighted_inner(U, U, weights.wx), np.eye(3), atol=1e-12)
        np.testing.assert_allclose(weighted_inner(Y, Y, weights.wxi), np.eye(3), atol=1e-12)

    def test_singular_values_match_scaled_svd(self) -> None:
        """Test Σ equals the leading singular values of W_x^½ V W_ξ^½."""
        rng = np.random.default_rng(9)
        weights = random_weights(15, 25)
        V = rng.normal(size=(15, 25))
        _, Sigma, _ = truncated_svd_weighted(V, weights, 4)
        scaled = np.sqrt(weights.wx)[:, None] * V * np.sqrt(weights.wxi)[None, :]
        expected = np.linalg.svd(scaled, compute_uv=False)[:4]
        np.testing.assert_allclose(np.diag(Sigma), expected, rtol=1e-10)

    def test_rank_deficiency_reports_achievable(self) -> None:
        """Test a rank-2 matrix cannot be truncated to rank 3."""
        rng = np.random.default_rng(10)
        weights = random_weights(10, 6)
        V = rng.normal(size=(10, 2)) @ rng.normal(size=(2, 6))
        with pytest.raises(RankDeficiencyError) as info:
            truncated_svd_weighted(V, weights, 3)
        assert info.value.achievable == 2

    def test_rank_out_of_range(self) -> None:
        """Test r larger than min(n, s) raises."""
        weights = random_weights(5, 4)
        with pytest.raises(LinalgError):
            truncated_svd_weighted(np.ones((5, 4)), weights, 5)


class TestLUSolve:
    """Tests for checked LU solves."""

    def test_solves(self) -> None:
        """Test a regular system."""
        A = np.array([[4.0, 1.0], [2.0, 3.0]])
        x = lu_solve_checked(A, np.array([1.0, 2.0]))
        np.testing.assert_allclose(A @ x, [1.0, 2.0])

    def test_singular_raises(self) -> None:
        """Test a singular matrix is named in the error."""
        with pytest.raises(LinalgError, match="Sigma"):
            lu_solve_checked(np.zeros((2, 2)), np.ones(2), what="Sigma")
