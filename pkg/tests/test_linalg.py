import math

import numpy as np
import pytest

from glskit import (
    IndefiniteMatrixError,
    RankTolerance,
    cholesky_spd,
    lsqr,
    nullspace_basis,
    pinv,
    projector_range,
    psd_sqrt,
    qr_householder,
    svd,
)
from helpers import orthogonal, spd_matrix


def test_svd_identity():
    f = svd(np.eye(3))
    assert f.rank == 3
    np.testing.assert_allclose(f.singular_values, np.ones(3))
    np.testing.assert_allclose(f.reconstruct(), np.eye(3), atol=1e-15)


def test_svd_rank_deficient_diagonal():
    f = svd(np.diag([3.0, 0.0]))
    np.testing.assert_allclose(f.singular_values, [3.0, 0.0])
    assert f.rank == 1


def test_svd_golden_ratio_singular_values():
    # Oracle: the characteristic polynomial of A'A = [[1,1],[1,2]] solved in
    # closed form, lambda = (3 +- sqrt(5)) / 2, so sigma = (phi, phi - 1).
    A = np.array([[1.0, 1.0], [0.0, 1.0]])
    tr, det = 3.0, 1.0
    lam_hi = (tr + math.sqrt(tr**2 - 4 * det)) / 2
    lam_lo = (tr - math.sqrt(tr**2 - 4 * det)) / 2
    expected = np.sqrt([lam_hi, lam_lo])
    np.testing.assert_allclose(expected, [1.618033988749895, 0.6180339887498949])

    f = svd(A)
    np.testing.assert_allclose(f.singular_values, expected, rtol=1e-14)
    assert np.linalg.norm(f.reconstruct() - A) <= 1e-14


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("shape", [(10, 10), (40, 25), (100, 100)])
def test_svd_reconstruction_random(seed, shape):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal(shape)
    f = svd(A)
    assert np.linalg.norm(f.reconstruct() - A) <= 1e-13 * np.linalg.norm(A)
    assert np.linalg.norm(f.U.T @ f.U - np.eye(shape[0])) <= 1e-13
    assert np.linalg.norm(f.V.T @ f.V - np.eye(shape[1])) <= 1e-13
    assert np.all(np.diff(f.singular_values) <= 0)


def test_rank_tolerance_modes():
    A = np.diag([1.0, 1e-5])
    assert svd(A).rank == 2
    assert svd(A, RankTolerance("absolute", 1e-4)).rank == 1
    assert svd(A, RankTolerance("relative", 1e-3)).rank == 1
    with pytest.raises(ValueError):
        RankTolerance("absolute")
    with pytest.raises(ValueError):
        RankTolerance("relative", -1.0)


def test_pinv_identity_and_diagonal():
    np.testing.assert_allclose(pinv(np.eye(4)), np.eye(4), atol=1e-14)
    np.testing.assert_allclose(pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]), atol=1e-15)


def test_pinv_full_column_rank_oracle():
    # Oracle for full column rank: pinv(A) = inv(A'A) A' = A' / (A'A).
    a = np.array([[3.0], [4.0]])
    expected = a.T / float(a[:, 0] @ a[:, 0])
    np.testing.assert_allclose(expected, [[3 / 25, 4 / 25]])
    np.testing.assert_allclose(pinv(a), expected, rtol=1e-14)


@pytest.mark.parametrize("seed", range(100))
def test_pinv_involution_and_moore_penrose(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((8, 5))
    Ap = pinv(A)
    scale = np.linalg.norm(A)
    assert np.linalg.norm(pinv(Ap) - A) <= 1e-10 * scale
    assert np.linalg.norm(A @ Ap @ A - A) <= 1e-12 * scale
    assert np.linalg.norm(Ap @ A @ Ap - Ap) <= 1e-12 * np.linalg.norm(Ap)
    for proj in (A @ Ap, Ap @ A):
        assert np.linalg.norm(proj - proj.T) <= 1e-12


def test_qr_identity_and_sign_convention():
    Q, R = qr_householder(np.eye(2))
    np.testing.assert_allclose(Q @ R, np.eye(2), atol=1e-15)
    Q, R = qr_householder(np.array([[-2.0]]))
    assert abs(abs(Q[0, 0]) - 1.0) <= 1e-15
    np.testing.assert_allclose(Q @ R, [[-2.0]], atol=1e-15)


def test_qr_random_reconstruction():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((5, 3))
    Q, R = qr_householder(A)
    assert np.linalg.norm(Q @ R - A) <= 1e-14 * np.linalg.norm(A)
    assert np.linalg.norm(Q.T @ Q - np.eye(3)) <= 1e-14
    assert np.allclose(R, np.triu(R))
    with pytest.raises(ValueError):
        qr_householder(np.ones((2, 3)))


def test_cholesky_identity_and_hand_case():
    np.testing.assert_allclose(cholesky_spd(np.eye(3)), np.eye(3), atol=1e-15)
    # Hand expansion of the 2x2 recursion: c11 = 2, c21 = 1, c22 = 1.
    C = cholesky_spd(np.array([[4.0, 2.0], [2.0, 2.0]]))
    np.testing.assert_allclose(C, [[2.0, 0.0], [1.0, 1.0]], atol=1e-15)


def test_cholesky_rejects_indefinite():
    with pytest.raises(IndefiniteMatrixError):
        cholesky_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))  # eigenvalues 3, -1
    with pytest.raises(ValueError):
        cholesky_spd(np.array([[1.0, 2.0], [0.0, 1.0]]))  # not symmetric


def test_cholesky_psd_singular_raises():
    rng = np.random.default_rng(3)
    B = rng.standard_normal((4, 2))
    with pytest.raises(IndefiniteMatrixError):
        cholesky_spd(B @ B.T)


def test_psd_sqrt_cases():
    np.testing.assert_allclose(psd_sqrt(np.eye(5)), np.eye(5), atol=1e-14)
    np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 0.0])), np.diag([2.0, 0.0]), atol=1e-14)
    rng = np.random.default_rng(11)
    M = rng.standard_normal((3, 2))
    P = M.T @ M
    S = psd_sqrt(P)
    assert np.linalg.norm(S.T @ S - P) <= 1e-13 * np.linalg.norm(P)
    with pytest.raises(IndefiniteMatrixError):
        psd_sqrt(np.diag([1.0, -1.0]))


def test_projector_range_cases():
    np.testing.assert_allclose(projector_range(np.eye(4)), np.eye(4), atol=1e-14)
    np.testing.assert_allclose(
        projector_range(np.array([[1.0], [0.0]])), np.diag([1.0, 0.0]), atol=1e-14
    )
    # Oracle v v' / ||v||^2 for a single column.
    v = np.array([[1.0], [1.0]])
    expected = (v @ v.T) / 2.0
    np.testing.assert_allclose(projector_range(v), expected, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_projector_properties(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((6, 3))
    P = projector_range(A)
    assert np.linalg.norm(P @ P - P) <= 1e-12
    assert np.linalg.norm(P - P.T) <= 1e-13
    assert np.linalg.norm(P @ A - A) <= 1e-12 * np.linalg.norm(A)


def test_nullspace_basis_cases():
    assert nullspace_basis(np.eye(3)).shape == (3, 0)
    B = nullspace_basis(np.array([[1.0, 1.0]]))
    assert B.shape == (2, 1)
    expected = np.array([1.0, -1.0]) / math.sqrt(2)
    assert min(
        np.linalg.norm(B[:, 0] - expected), np.linalg.norm(B[:, 0] + expected)
    ) <= 1e-14


def test_nullspace_basis_planted_rank():
    rng = np.random.default_rng(5)
    # rank-2 4x4 built by construction
    A = rng.standard_normal((4, 2)) @ rng.standard_normal((2, 4))
    B = nullspace_basis(A)
    assert B.shape == (4, 2)
    assert np.linalg.norm(B.T @ B - np.eye(2)) <= 1e-13
    assert np.linalg.norm(A @ B) <= 1e-12 * np.linalg.norm(A)


def test_lsqr_identity_one_iteration():
    res = lsqr(np.eye(3), np.array([1.0, 0.0, 0.0]), tau=1e-12)
    np.testing.assert_allclose(res.x, [1.0, 0.0, 0.0], atol=1e-15)
    assert res.iterations == 1
    assert res.converged


def test_lsqr_consistent_singular_min_norm():
    res = lsqr(np.diag([1.0, 0.0]), np.array([2.0, 0.0]))
    np.testing.assert_allclose(res.x, [2.0, 0.0], atol=1e-14)


def test_lsqr_matches_cholesky_oracle():
    rng = np.random.default_rng(20)
    G = spd_matrix(rng, 20, cond=100.0)
    rhs = rng.standard_normal(20)
    C = cholesky_spd(G)
    expected = np.linalg.solve(C.T, np.linalg.solve(C, rhs))
    res = lsqr(G, rhs, tau=1e-12)
    assert res.converged
    assert np.linalg.norm(res.x - expected) <= 1e-10 * np.linalg.norm(expected)


def test_lsqr_accepts_callables_and_caps():
    rng = np.random.default_rng(4)
    G = spd_matrix(rng, 15, cond=1e4)
    rhs = rng.standard_normal(15)
    res = lsqr(lambda v: G @ v, rhs, tau=1e-14, max_iter=2)
    assert res.iterations == 2
    assert not res.converged  # cap reached is a status, not an error


@pytest.mark.parametrize("seed", range(8))
def test_lsqr_solution_orthogonal_to_nullspace(seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((12, 7))
    G = B @ B.T  # PSD, rank 7
    target = rng.standard_normal(12)
    rhs = G @ target  # consistent by construction
    res = lsqr(G, rhs, tau=1e-14)
    N = nullspace_basis(G)
    assert N.shape[1] == 5
    assert np.abs(N.T @ res.x).max() <= 1e-8 * np.linalg.norm(res.x)


def test_orthogonal_helper():
    Q = orthogonal(np.random.default_rng(0), 6)
    assert np.linalg.norm(Q.T @ Q - np.eye(6)) <= 1e-13
