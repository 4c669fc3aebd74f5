"""Shared constructors for seeded test problems."""

import numpy as np

from glskit import GlsProblem


def orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def matrix_with_spectrum(rng, m, n, spectrum):
    """Dense m x n matrix with the given singular values (rank = len(spectrum))."""
    spectrum = np.asarray(spectrum, dtype=np.float64)
    r = spectrum.size
    U = orthogonal(rng, m)[:, :r]
    V = orthogonal(rng, n)[:, :r]
    return (U * spectrum) @ V.T


def random_matrix(rng, m, n, rank=None, cond=10.0):
    """Random matrix with controlled rank and condition number."""
    if rank is None:
        rank = min(m, n)
    spectrum = np.logspace(0.0, -np.log10(cond), rank) if rank > 1 else np.ones(1)
    return matrix_with_spectrum(rng, m, n, spectrum)


def spd_matrix(rng, n, cond=100.0):
    Q = orthogonal(rng, n)
    d = np.logspace(0.0, -np.log10(cond), n)
    return (Q * d) @ Q.T


def random_gls_problem(
    seed,
    m=8,
    n=6,
    p=4,
    q=None,
    rank_a=None,
    rank_m=None,
    rank_l=None,
    shared_null=False,
    cond=10.0,
):
    """Seeded GLS problem with controlled ranks.

    ``q=None`` leaves M as the identity. ``shared_null=True`` plants a common
    unit vector in the null spaces of A and L (so N(MA) & N(L) intersect and
    G is singular).
    """
    rng = np.random.default_rng(seed)
    A = random_matrix(rng, m, n, rank_a, cond)
    L = random_matrix(rng, p, n, rank_l, cond)
    M = random_matrix(rng, q, m, rank_m, cond) if q is not None else None
    if shared_null:
        e = rng.standard_normal(n)
        e /= np.linalg.norm(e)
        killer = np.eye(n) - np.outer(e, e)
        A = A @ killer
        L = L @ killer
    b = rng.standard_normal(m)
    return GlsProblem(A, M, L, b)
