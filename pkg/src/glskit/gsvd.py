"""Generalized singular value decomposition of a matrix pair {A, L}.

The pair is factored as ``A = U_A @ Sigma_A @ inv(X)`` and
``L = U_L @ Sigma_L @ inv(X)`` with orthogonal U_A, U_L and invertible X,
where the diagonal blocks satisfy ``C_A.T @ C_A + S_L.T @ S_L = I_r`` and
``r = rank([A; L])``. Columns of X are grouped into four blocks: q1 columns
where A dominates (unit generalized singular value), q2 mixed columns, q3
columns where L dominates, and n - r columns spanning the common null space.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .linalg import FactorizationError, as_matrix, svd

__all__ = [
    "GsvdFactors",
    "XPartition",
    "gsvd_pair",
    "partition_x",
    "sigma_max_ca",
    "wpinv_via_gsvd",
    "save_factors",
]


@dataclass
class GsvdFactors:
    U_A: np.ndarray  # m x m orthogonal
    U_L: np.ndarray  # p x p orthogonal
    X: np.ndarray  # n x n invertible
    C_A: np.ndarray  # m x r diagonal block
    S_L: np.ndarray  # p x r diagonal block
    r: int
    q1: int
    q2: int
    q3: int
    X_inv: np.ndarray  # exact inverse assembled from the construction
    range_basis: np.ndarray  # n x r orthonormal basis of R(A^T A + L^T L)

    @property
    def shape(self):
        return (self.U_A.shape[0], self.U_L.shape[0], self.X.shape[0])

    def sigma_a(self):
        m, _, n = self.shape
        S = np.zeros((m, n))
        S[:, : self.r] = self.C_A
        return S

    def sigma_l(self):
        _, p, n = self.shape
        S = np.zeros((p, n))
        S[:, : self.r] = self.S_L
        return S


@dataclass
class XPartition:
    X1: np.ndarray
    X2: np.ndarray
    X3: np.ndarray
    X4: np.ndarray


def _orthonormalize_columns(T):
    """QR-orthonormalize near-orthonormal columns, keeping order and sign."""
    Q, R = np.linalg.qr(T, mode="complete")
    k = T.shape[1]
    signs = np.sign(np.diag(R)[:k])
    signs[signs == 0] = 1.0
    Q[:, :k] *= signs
    return Q[:, :k], Q[:, k:]


def gsvd_pair(A, L, tol=None, cluster_tol=1e-12):
    """GSVD of the pair {A, L} via the stacked SVD and a CS-style split.

    The stacked matrix ``K = [A; L]`` is factored ``K = Z diag(sig) W.T``;
    the orthonormal block Z is split at row m and the SVD of its top part
    delivers U_A together with the cosine values. Sines are recovered as the
    column norms of ``Z_L @ Vhat``, whose normalized columns (placed last,
    after an orthonormal completion) form U_L. ``X = [W diag(1/sig) Vhat, N]``
    with N an orthonormal basis of the null space of K.

    Cosines within ``cluster_tol`` of 1 (0) are snapped into the q1 (q3)
    block so the factors carry the exact block structure.
    """
    A = as_matrix(A, "A")
    L = as_matrix(L, "L")
    if A.shape[1] != L.shape[1]:
        raise ValueError("A and L must have the same number of columns")
    m, n = A.shape
    p = L.shape[0]

    K = np.vstack([A, L])
    kf = svd(K, tol)
    r = kf.rank
    Z = kf.U[:, :r]
    sig = kf.singular_values[:r]
    W = kf.V[:, :r]
    N = kf.V[:, r:]

    Za = Z[:m]
    try:
        Ua, c_part, Vhat_t = np.linalg.svd(Za, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"SVD of the stacked split failed: {exc}") from exc
    Vhat = Vhat_t.T

    c = np.zeros(r)
    c[: min(m, r)] = np.clip(c_part, 0.0, 1.0)
    q1 = int(np.count_nonzero(1.0 - c <= cluster_tol))
    q3 = int(np.count_nonzero(c <= cluster_tol))
    q2 = r - q1 - q3

    C_A = np.zeros((m, r))
    for i in range(q1):
        C_A[i, i] = 1.0
    for i in range(q1, q1 + q2):
        C_A[i, i] = c[i]

    # Columns q1..r of Z_L @ Vhat are orthogonal with norms sqrt(1 - c_i^2);
    # they become the trailing columns of U_L, preceded by a completion.
    T = Z[m:] @ Vhat
    nz = r - q1
    S_L = np.zeros((p, r))
    if nz > 0:
        raw = T[:, q1:]
        norms = np.linalg.norm(raw, axis=0)
        block, completion = _orthonormalize_columns(raw / norms)
        U_L = np.hstack([completion, block])
        offset = p - nz
        for j in range(nz):
            idx = q1 + j
            S_L[offset + j, idx] = 1.0 if idx >= r - q3 else norms[j]
    else:
        U_L = np.eye(p)

    X_main = (W / sig) @ Vhat if r else np.zeros((n, 0))
    X = np.hstack([X_main, N])
    X_inv = np.vstack([Vhat.T @ (sig[:, None] * W.T), N.T])

    factors = GsvdFactors(
        U_A=Ua, U_L=U_L, X=X, C_A=C_A, S_L=S_L, r=r, q1=q1, q2=q2, q3=q3,
        X_inv=X_inv, range_basis=W,
    )

    scale = np.linalg.norm(A) + np.linalg.norm(L)
    resid = max(
        np.linalg.norm(A - Ua @ factors.sigma_a() @ X_inv),
        np.linalg.norm(L - U_L @ factors.sigma_l() @ X_inv),
    )
    if resid > 1e-10 * max(scale, 1e-300):
        raise FactorizationError(
            f"GSVD reconstruction residual {resid:.3e} exceeds tolerance", residual=resid
        )
    return factors


def partition_x(f: GsvdFactors) -> XPartition:
    """Split X into the (q1, q2, q3, n - r) column blocks."""
    q1, q2, q3 = f.q1, f.q2, f.q3
    X = f.X
    return XPartition(
        X1=X[:, :q1],
        X2=X[:, q1 : q1 + q2],
        X3=X[:, q1 + q2 : q1 + q2 + q3],
        X4=X[:, f.r :],
    )


def sigma_max_ca(f: GsvdFactors) -> float:
    """Largest diagonal entry of C_A, the norm of v -> proj_R(P) A v."""
    d = np.diag(f.C_A)
    return float(d.max()) if d.size else 0.0


def wpinv_via_gsvd(f: GsvdFactors, G) -> np.ndarray:
    """Closed-form weighted pseudoinverse (M = I): proj_R(G) X pinv(Sigma_A) U_A.T.

    Uses the partition identity ``X pinv(Sigma_A) = [X1, X2 inv(C_q2), 0]``,
    so no singular values are inverted beyond the q2 block. ``G`` must be the
    Gram matrix ``A.T A + L.T L`` of the factored pair; its null space is
    checked against the X4 block.
    """
    G = as_matrix(G, "G")
    m, _, n = f.shape
    if G.shape != (n, n):
        raise ValueError(f"G must be {n} x {n}, got {G.shape}")
    part = partition_x(f)
    if part.X4.size:
        gnorm = np.linalg.norm(G)
        if gnorm and np.linalg.norm(G @ part.X4) > 1e-6 * gnorm * max(
            np.linalg.norm(part.X4), 1.0
        ):
            raise ValueError("G is inconsistent with the factored pair (X4 not in its null space)")

    cq2 = np.diag(f.C_A)[f.q1 : f.q1 + f.q2]
    XS = np.zeros((n, m))
    XS[:, : f.q1] = part.X1
    if f.q2:
        XS[:, f.q1 : f.q1 + f.q2] = part.X2 / cq2[None, :]
    projector = f.range_basis @ f.range_basis.T
    return projector @ XS @ f.U_A.T


def save_factors(f: GsvdFactors, directory):
    """Write the factors as Matrix Market files plus a JSON block summary."""
    from .mmio import write_matrix_market

    os.makedirs(directory, exist_ok=True)
    write_matrix_market(os.path.join(directory, "U_A.mtx"), f.U_A)
    write_matrix_market(os.path.join(directory, "U_L.mtx"), f.U_L)
    write_matrix_market(os.path.join(directory, "X.mtx"), f.X)
    write_matrix_market(os.path.join(directory, "CA.mtx"), f.C_A)
    write_matrix_market(os.path.join(directory, "SL.mtx"), f.S_L)
    sidecar = {"r": f.r, "q1": f.q1, "q2": f.q2, "q3": f.q3}
    with open(os.path.join(directory, "gsvd.json"), "w") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")
