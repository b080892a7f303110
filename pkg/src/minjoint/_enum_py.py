"""Pure-NumPy subset-enumeration kernels.

Fallback backend for the compiled core in ``_enum_core``; both expose the
same two functions and must return the same candidate sets.  Work is done
in chunks of constraint-row subsets so the batched LAPACK calls dominate.
"""

from __future__ import annotations

import itertools

import numpy as np

_CHUNK = 16384


def _chunked_combinations(m: int, k: int):
    it = itertools.combinations(range(m), k)
    while True:
        chunk = list(itertools.islice(it, _CHUNK))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.intp)


def vertex_candidates(w: np.ndarray, t: np.ndarray, eps_rank: float,
                      feas_tol: float) -> np.ndarray:
    """Unique solutions of k-row subsets of ``w x >= t`` feasible for the full system.

    ``w`` is (m, k); a subset qualifies when its smallest singular value
    exceeds ``eps_rank`` times its largest.  Candidates are not deduplicated.
    """
    m, k = w.shape
    if k == 0 or m < k:
        return np.empty((0, k))
    out = []
    for idx in _chunked_combinations(m, k):
        mats = w[idx]
        s = np.linalg.svd(mats, compute_uv=False)
        ok = (s[:, 0] > 0.0) & (s[:, -1] > eps_rank * s[:, 0])
        if not np.any(ok):
            continue
        sols = np.linalg.solve(mats[ok], t[idx[ok]][..., None])[..., 0]
        feas = np.all(sols @ w.T >= t[None, :] - feas_tol, axis=1)
        if np.any(feas):
            out.append(sols[feas])
    return np.vstack(out) if out else np.empty((0, k))


def ray_candidates(w: np.ndarray, eps_rank: float, feas_tol: float) -> np.ndarray:
    """Directions spanning rank-(k-1) row subsets of ``w x >= 0`` that stay in the cone.

    Assumes the cone is pointed (``w`` has full column rank); directions come
    back unit-normalized, one per qualifying subset, not deduplicated.
    """
    m, k = w.shape
    if k == 0:
        return np.empty((0, 0))
    if k == 1:
        for cand in (np.array([1.0]), np.array([-1.0])):
            if np.all(w @ cand >= -feas_tol):
                return cand[None, :]
        return np.empty((0, 1))
    out = []
    for idx in _chunked_combinations(m, k - 1):
        mats = w[idx]
        _, s, vt = np.linalg.svd(mats)
        ok = (s[:, 0] > 0.0) & (s[:, -1] > eps_rank * s[:, 0])
        if not np.any(ok):
            continue
        dirs = vt[ok, -1, :]
        vals = dirs @ w.T
        pos = np.all(vals >= -feas_tol, axis=1)
        neg = np.all(vals <= feas_tol, axis=1) & ~pos
        if np.any(pos):
            out.append(dirs[pos])
        if np.any(neg):
            out.append(-dirs[neg])
    return np.vstack(out) if out else np.empty((0, k))
