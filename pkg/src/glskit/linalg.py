"""Dense linear-algebra kernels shared by the rest of the package.

All routines operate on float64 numpy arrays (scipy sparse inputs are
densified on entry). Rank decisions are made explicit through
:class:`RankTolerance` so every routine that truncates singular values
documents its cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EPS = float(np.finfo(np.float64).eps)

__all__ = [
    "EPS",
    "FactorizationError",
    "IndefiniteMatrixError",
    "RankTolerance",
    "SvdFactors",
    "LsqrResult",
    "as_matrix",
    "as_vector",
    "svd",
    "pinv",
    "qr_householder",
    "cholesky_spd",
    "psd_sqrt",
    "projector_range",
    "nullspace_basis",
    "lsqr",
]


class FactorizationError(RuntimeError):
    """A factorization did not converge or failed its residual check."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class IndefiniteMatrixError(RuntimeError):
    """A matrix required to be SPD (or PSD) turned out not to be."""

    def __init__(self, message, pivot=None, index=None):
        super().__init__(message)
        self.pivot = pivot
        self.index = index


def as_matrix(a, name="matrix"):
    """Coerce ``a`` to a finite float64 2-D array. Accepts scipy sparse."""
    if hasattr(a, "toarray"):
        a = a.toarray()
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if a.size and not np.isfinite(a).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return a


def as_vector(v, length=None, name="vector"):
    """Coerce ``v`` to a finite float64 1-D array, optionally of fixed length."""
    if hasattr(v, "toarray"):
        v = v.toarray()
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if length is not None and v.size != length:
        raise ValueError(f"{name} must have length {length}, got {v.size}")
    if v.size and not np.isfinite(v).all():
        raise ValueError(f"{name} contains NaN or Inf entries")
    return v


@dataclass(frozen=True)
class RankTolerance:
    """Cutoff rule for numerical rank decisions.

    ``relative`` mode uses ``value * sigma_max`` with ``value`` defaulting to
    ``max(m, n) * eps``; ``absolute`` mode uses ``value`` directly.
    """

    mode: str = "relative"
    value: float | None = None

    def __post_init__(self):
        if self.mode not in ("relative", "absolute"):
            raise ValueError(f"unknown rank tolerance mode {self.mode!r}")
        if self.mode == "absolute" and self.value is None:
            raise ValueError("absolute rank tolerance needs an explicit value")
        if self.value is not None and not self.value > 0:
            raise ValueError("rank tolerance value must be positive")

    def cutoff(self, shape, sigma_max):
        if self.mode == "absolute":
            return float(self.value)
        rel = self.value if self.value is not None else max(shape) * EPS
        return float(rel * sigma_max)


@dataclass
class SvdFactors:
    """Full SVD ``A = U @ Sigma @ V.T`` plus the numerical rank of A."""

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray
    rank: int

    def sigma_matrix(self):
        m, n = self.U.shape[0], self.V.shape[0]
        S = np.zeros((m, n))
        k = self.singular_values.size
        S[:k, :k] = np.diag(self.singular_values)
        return S

    def reconstruct(self):
        return self.U @ self.sigma_matrix() @ self.V.T


def svd(A, tol=None):
    """Full SVD with an explicit numerical-rank decision.

    Raises :class:`FactorizationError` if the underlying iteration fails to
    converge.
    """
    A = as_matrix(A, "A")
    if A.size == 0:
        raise ValueError("svd requires a nonempty matrix")
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(f"SVD did not converge: {exc}") from exc
    tol = tol if tol is not None else RankTolerance()
    smax = float(s[0]) if s.size else 0.0
    cutoff = tol.cutoff(A.shape, smax)
    rank = int(np.count_nonzero(s > cutoff))
    return SvdFactors(U=U, singular_values=s, V=Vt.T, rank=rank)


def pinv(A, tol=None):
    """Moore-Penrose pseudoinverse with singular values <= cutoff zeroed."""
    A = as_matrix(A, "A")
    if A.size == 0:
        return np.zeros((A.shape[1], A.shape[0]))
    f = svd(A, tol)
    r = f.rank
    if r == 0:
        return np.zeros((f.V.shape[0], f.U.shape[0]))
    return (f.V[:, :r] / f.singular_values[:r]) @ f.U[:, :r].T


def qr_householder(A):
    """Thin QR factorization; requires rows >= cols."""
    A = as_matrix(A, "A")
    if A.shape[0] < A.shape[1]:
        raise ValueError("qr_householder expects rows >= cols")
    Q, R = np.linalg.qr(A, mode="reduced")
    return Q, R


def _require_symmetric(G, name, rtol=1e-10):
    G = as_matrix(G, name)
    if G.shape[0] != G.shape[1]:
        raise ValueError(f"{name} must be square, got shape {G.shape}")
    scale = np.linalg.norm(G)
    if scale and np.linalg.norm(G - G.T) > rtol * scale:
        raise ValueError(f"{name} is not symmetric")
    return 0.5 * (G + G.T)


def cholesky_spd(G, pivot_tol=1e-14):
    """Lower-triangular C with ``C @ C.T == G`` for SPD ``G``.

    A pivot at or below ``pivot_tol * max(diag(G))`` raises
    :class:`IndefiniteMatrixError`, which callers use to fall back to a
    pseudoinverse path for PSD-singular matrices.
    """
    G = _require_symmetric(G, "G")
    n = G.shape[0]
    C = np.zeros_like(G)
    threshold = pivot_tol * max(float(G.diagonal().max(initial=0.0)), 0.0)
    for j in range(n):
        d = G[j, j] - C[j, :j] @ C[j, :j]
        if d <= threshold:
            raise IndefiniteMatrixError(
                f"nonpositive pivot {d:.3e} at column {j}", pivot=float(d), index=j
            )
        C[j, j] = math.sqrt(d)
        if j + 1 < n:
            C[j + 1 :, j] = (G[j + 1 :, j] - C[j + 1 :, :j] @ C[j, :j]) / C[j, j]
    return C


def psd_sqrt(P, neg_tol=1e-12):
    """Symmetric square root of a symmetric PSD matrix.

    Eigenvalues within ``-neg_tol * lambda_max`` of zero are clipped; anything
    more negative raises :class:`IndefiniteMatrixError`.
    """
    P = _require_symmetric(P, "P")
    w, V = np.linalg.eigh(P)
    scale = max(float(np.abs(w).max(initial=0.0)), EPS)
    if w.size and w.min() < -neg_tol * scale:
        raise IndefiniteMatrixError(
            f"negative eigenvalue {w.min():.3e} (scale {scale:.3e})", pivot=float(w.min())
        )
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T


def projector_range(A, tol=None):
    """Orthogonal projector onto the column space of A."""
    f = svd(A, tol)
    Ur = f.U[:, : f.rank]
    P = Ur @ Ur.T
    return 0.5 * (P + P.T)


def nullspace_basis(A, tol=None):
    """Orthonormal basis of the null space of A, an n x (n - rank) matrix."""
    f = svd(A, tol)
    return f.V[:, f.rank :].copy()


@dataclass
class LsqrResult:
    x: np.ndarray
    iterations: int
    converged: bool
    relative_residual: float


def lsqr(G, rhs, tau=1e-12, max_iter=None):
    """LSQR for ``min ||G s - rhs||_2`` with a symmetric operator G.

    ``G`` may be a dense array, a scipy sparse matrix, or a callable
    implementing the matrix-vector product. Iteration starts from zero (so
    the result is the minimum 2-norm solution for consistent systems) and
    stops once the recursively estimated relative residual drops to ``tau``.
    Hitting ``max_iter`` is reported through the ``converged`` flag, not an
    error.
    """
    rhs = as_vector(rhs, name="rhs")
    matvec = G if callable(G) else (lambda v, _G=G: _G @ v)
    n = rhs.size
    if max_iter is None:
        max_iter = 4 * n

    x = np.zeros(n)
    beta1 = float(np.linalg.norm(rhs))
    if beta1 == 0.0:
        return LsqrResult(x=x, iterations=0, converged=True, relative_residual=0.0)
    u = rhs / beta1
    v_raw = np.asarray(matvec(u), dtype=np.float64)
    alpha = float(np.linalg.norm(v_raw))
    if alpha == 0.0:
        # rhs is orthogonal to the range; zero minimizes the residual
        return LsqrResult(x=x, iterations=0, converged=True, relative_residual=1.0)
    v = v_raw / alpha
    w = v.copy()
    phi_bar = beta1
    rho_bar = alpha

    iterations = 0
    relres = 1.0
    converged = False
    for it in range(1, max_iter + 1):
        r_u = np.asarray(matvec(v), dtype=np.float64) - alpha * u
        beta = float(np.linalg.norm(r_u))
        if beta > 0.0:
            u = r_u / beta
            r_v = np.asarray(matvec(u), dtype=np.float64) - beta * v
            alpha_next = float(np.linalg.norm(r_v))
            if alpha_next > 0.0:
                v = r_v / alpha_next
        else:
            alpha_next = 0.0

        rho = math.hypot(rho_bar, beta)
        c = rho_bar / rho
        s = beta / rho
        theta = s * alpha_next
        phi = c * phi_bar
        phi_bar = s * phi_bar
        x = x + (phi / rho) * w
        iterations = it
        relres = phi_bar / beta1

        if relres <= tau:
            converged = True
            break
        if beta == 0.0 or alpha_next == 0.0:
            # Krylov space exhausted; the current iterate is exact
            converged = True
            break
        w = v - (theta / rho) * w
        rho_bar = -c * alpha_next
        alpha = alpha_next

    if not converged:
        # after stagnation the recurrence residual under-reports; callers
        # that hit the cap get the directly evaluated value
        relres = float(np.linalg.norm(np.asarray(matvec(x)) - rhs)) / beta1

    return LsqrResult(x=x, iterations=iterations, converged=converged, relative_residual=relres)
