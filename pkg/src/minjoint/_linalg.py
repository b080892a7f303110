"""Dense linear-algebra helpers shared across modules."""

from __future__ import annotations

import numpy as np


def hs_inner(x: np.ndarray, y: np.ndarray) -> float:
    """Hilbert-Schmidt inner product tr(x† y), real part.

    For Hermitian arguments the full inner product is real, so taking the
    real part loses nothing.
    """
    return float(np.real(np.sum(np.conj(x) * y)))


def hs_norm(x: np.ndarray) -> float:
    return float(np.sqrt(max(hs_inner(x, x), 0.0)))


def hermitian_flatten(m: np.ndarray) -> np.ndarray:
    """Flatten a Hermitian d x d matrix into d**2 real coordinates.

    Order: the d diagonal entries (real parts), then real and imaginary
    parts of the strict upper triangle, row-major.  Every operator equality
    in the package is expanded through this one flattening.
    """
    d = m.shape[0]
    out = np.empty(d * d)
    out[:d] = np.real(np.diagonal(m))
    k = d
    for i in range(d):
        for j in range(i + 1, d):
            out[k] = m[i, j].real
            out[k + 1] = m[i, j].imag
            k += 2
    return out


def flatten_family(mats) -> np.ndarray:
    """Stack hermitian_flatten of each matrix into a (len, d**2) array."""
    return np.array([hermitian_flatten(m) for m in mats])


def numerical_rank(rows: np.ndarray, eps_rank: float) -> int:
    """Rank of a stack of row vectors via singular values > eps_rank * sigma_max."""
    if rows.size == 0:
        return 0
    s = np.linalg.svd(rows, compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.sum(s > eps_rank * s[0]))


def nullspace(a: np.ndarray, eps_rank: float) -> np.ndarray:
    """Orthonormal basis (columns) of the nullspace of ``a``."""
    n = a.shape[1]
    if a.shape[0] == 0 or not np.any(a):
        return np.eye(n)
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > eps_rank * s[0])) if s[0] > 0.0 else 0
    return vt[rank:].T.copy()


def row_space_basis(a: np.ndarray, eps_rank: float) -> np.ndarray:
    """Orthonormal basis (columns) of the row space of ``a``."""
    if a.shape[0] == 0 or not np.any(a):
        return np.empty((a.shape[1], 0))
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > eps_rank * s[0])) if s[0] > 0.0 else 0
    return vt[:rank].T.copy()
