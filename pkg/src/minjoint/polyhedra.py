"""Exact-structure polyhedral computations on small dense real systems.

Vertex enumeration of polytopes and extreme-ray enumeration of pointed
cones walk subsets of constraint rows, exactly as the active-set
characterization prescribes; LP feasibility is a hand-rolled phase-one
simplex with Bland's rule so that witnesses are deterministic.

The subset walk is the hot loop of the whole package.  A compiled Cython
core is used when available; ``MINJOINT_PURE_PYTHON=1`` forces the NumPy
fallback.  Both backends return identical candidate sets.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._linalg import nullspace, row_space_basis
from .errors import (
    ConsistencyError,
    EnumerationCapError,
    NumericalError,
    SimplexCycleError,
    UnboundedSystemError,
)
from .observables import DEFAULT_TOL, Tolerance

if os.environ.get("MINJOINT_PURE_PYTHON"):
    from . import _enum_py as _backend

    _BACKEND_NAME = "python"
else:
    try:
        from . import _enum_core as _backend  # type: ignore[attr-defined]

        _BACKEND_NAME = "compiled"
    except ImportError:
        from . import _enum_py as _backend

        _BACKEND_NAME = "python"


def enumeration_backend() -> str:
    """Name of the active subset-enumeration backend: 'compiled' or 'python'."""
    return _BACKEND_NAME


# Reduced rows whose coefficients all fall below this are treated as vacuous;
# genuine rows have O(1) coefficients.
_ZERO_ROW_TOL = 1e-11

_VERTEX_DEDUP_TOL = 1e-7


@dataclass(frozen=True)
class Caps:
    """Budget for combinatorial enumeration."""

    max_dim: int = 12
    max_rows: int = 40
    budget: int = 5_000_000


DEFAULT_CAPS = Caps()


@dataclass(frozen=True)
class LinearSystem:
    """Equalities a.x = b and inequalities a.x >= b over R^n."""

    n: int
    a_eq: np.ndarray
    b_eq: np.ndarray
    a_ge: np.ndarray
    b_ge: np.ndarray

    def __post_init__(self):
        a_eq = np.atleast_2d(np.asarray(self.a_eq, dtype=float)).reshape(-1, self.n)
        a_ge = np.atleast_2d(np.asarray(self.a_ge, dtype=float)).reshape(-1, self.n)
        b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        b_ge = np.asarray(self.b_ge, dtype=float).reshape(-1)
        if len(b_eq) != len(a_eq) or len(b_ge) != len(a_ge):
            raise ValueError("row/rhs count mismatch")
        for arr in (a_eq, b_eq, a_ge, b_ge):
            if not np.all(np.isfinite(arr)):
                raise ValueError("system entries must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "a_eq", a_eq)
        object.__setattr__(self, "b_eq", b_eq)
        object.__setattr__(self, "a_ge", a_ge)
        object.__setattr__(self, "b_ge", b_ge)

    @classmethod
    def from_rows(cls, n, eq_rows=(), ineq_rows=()):
        """Build from (vector, scalar) pairs."""
        a_eq = np.array([r[0] for r in eq_rows], dtype=float).reshape(-1, n)
        b_eq = np.array([r[1] for r in eq_rows], dtype=float)
        a_ge = np.array([r[0] for r in ineq_rows], dtype=float).reshape(-1, n)
        b_ge = np.array([r[1] for r in ineq_rows], dtype=float)
        return cls(n, a_eq, b_eq, a_ge, b_ge)

    def is_homogeneous(self, atol: float = 0.0) -> bool:
        big = 0.0
        if self.b_eq.size:
            big = max(big, float(np.max(np.abs(self.b_eq))))
        if self.b_ge.size:
            big = max(big, float(np.max(np.abs(self.b_ge))))
        return big <= atol


def system_residual(sys: LinearSystem, x: np.ndarray):
    """(max equality residual, max inequality violation) at a point."""
    eq = float(np.max(np.abs(sys.a_eq @ x - sys.b_eq))) if len(sys.b_eq) else 0.0
    ge = float(np.max(sys.b_ge - sys.a_ge @ x)) if len(sys.b_ge) else 0.0
    return eq, max(ge, 0.0)


@dataclass(frozen=True)
class VertexSet:
    vertices: np.ndarray  # (count, n)
    dedup_tol: float = _VERTEX_DEDUP_TOL

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True)
class RaySet:
    rays: np.ndarray  # (count, n), unit norm
    lineality: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))  # (n, dim)

    def __len__(self):
        return len(self.rays)


@dataclass(frozen=True)
class AffineReduction:
    """Solution set of the equalities as origin + basis . z, with inequalities rewritten."""

    origin: np.ndarray
    basis: np.ndarray  # (n, n_reduced), orthonormal columns
    w: np.ndarray      # reduced inequality rows
    t: np.ndarray      # reduced inequality rhs
    empty: bool = False

    @property
    def n_reduced(self) -> int:
        return self.basis.shape[1]

    def embed(self, z: np.ndarray) -> np.ndarray:
        return self.origin + z @ self.basis.T


def affine_reduce(sys: LinearSystem, tol: Tolerance = DEFAULT_TOL) -> AffineReduction:
    """Eliminate the equality rows of a system.

    Returns the affine parametrization of the equality solution set and the
    inequalities in reduced coordinates; ``empty`` is set when the
    equalities are inconsistent.
    """
    n = sys.n
    if len(sys.b_eq) == 0:
        origin = np.zeros(n)
        basis = np.eye(n)
    else:
        u, s, vt = np.linalg.svd(sys.a_eq, full_matrices=True)
        rank = int(np.sum(s > tol.eps_rank * s[0])) if s.size and s[0] > 0 else 0
        if rank == 0:
            origin = np.zeros(n)
        else:
            origin = vt[:rank].T @ ((u[:, :rank].T @ sys.b_eq) / s[:rank])
        basis = vt[rank:].T.copy()
        resid = float(np.max(np.abs(sys.a_eq @ origin - sys.b_eq)))
        scale = max(1.0, float(np.max(np.abs(sys.b_eq))))
        if resid > tol.eps_norm * scale:
            return AffineReduction(origin, basis, np.empty((0, basis.shape[1])),
                                   np.empty(0), empty=True)
    w = sys.a_ge @ basis
    t = sys.b_ge - sys.a_ge @ origin
    return AffineReduction(origin, basis, w, t)


def _split_vacuous(w: np.ndarray, t: np.ndarray):
    """Separate rows with (numerically) zero normals from real ones."""
    if len(w) == 0:
        return w, t, np.empty(0)
    if w.shape[1] == 0:
        return w[:0], t[:0], t
    zero = np.max(np.abs(w), axis=1) <= _ZERO_ROW_TOL
    return w[~zero], t[~zero], t[zero]


def _guard(m: int, k: int, caps: Caps):
    if k > caps.max_dim:
        raise EnumerationCapError(f"reduced dimension {k} exceeds cap {caps.max_dim}")
    if m > caps.max_rows:
        raise EnumerationCapError(f"{m} inequality rows exceed cap {caps.max_rows}")
    if k >= 0 and m >= k and math.comb(m, k) > caps.budget:
        raise EnumerationCapError(
            f"C({m},{k}) = {math.comb(m, k)} subsets exceed budget {caps.budget}")


def _dedup_points(points: np.ndarray, dedup_tol: float) -> np.ndarray:
    if len(points) == 0:
        return points
    order = np.lexsort(points.T[::-1])
    points = points[order]
    kept = [points[0]]
    for p in points[1:]:
        dists = np.linalg.norm(np.array(kept) - p, axis=1)
        if np.min(dists) > dedup_tol:
            kept.append(p)
    return np.array(kept)


def _recession_cone_nontrivial(w: np.ndarray, tol: Tolerance) -> bool:
    """Whether {z : w z >= 0} contains a nonzero direction."""
    k = w.shape[1]
    if k == 0:
        return False
    if len(w) == 0:
        return True
    if nullspace(w, tol.eps_rank).shape[1] > 0:
        return True
    # Pointed cone: nontrivial iff some feasible point has constraint values
    # summing to at least one.
    probe = LinearSystem(
        k,
        np.empty((0, k)), np.empty(0),
        np.vstack([w, w.sum(axis=0)[None, :]]),
        np.concatenate([np.zeros(len(w)), [1.0]]),
    )
    feasible, _ = lp_feasible(probe, tol)
    return feasible


def enumerate_vertices(sys: LinearSystem, tol: Tolerance = DEFAULT_TOL,
                       caps: Caps = DEFAULT_CAPS) -> VertexSet:
    """All extreme points of a bounded system.

    Applies :func:`affine_reduce`, enumerates inequality-row subsets whose
    equality version has a unique solution, keeps the solutions feasible
    for the full system, and deduplicates.  Every returned vertex is
    rechecked against the original system.
    """
    red = affine_reduce(sys, tol)
    if red.empty:
        return VertexSet(np.empty((0, sys.n)))
    w, t, vac_t = _split_vacuous(red.w, red.t)
    if vac_t.size and np.max(vac_t) > tol.eps_norm:
        return VertexSet(np.empty((0, sys.n)))  # a vacuous row is violated
    k = red.n_reduced
    if k == 0:
        point = red.origin
        eq_res, ge_vio = system_residual(sys, point)
        if eq_res <= tol.eps_norm and ge_vio <= tol.eps_norm:
            return VertexSet(point[None, :])
        return VertexSet(np.empty((0, sys.n)))
    _guard(len(w), k, caps)
    if _recession_cone_nontrivial(w, tol):
        raise UnboundedSystemError(
            "a ray satisfies all homogeneous inequalities; system is unbounded")
    cand = _backend.vertex_candidates(
        np.ascontiguousarray(w), np.ascontiguousarray(t), tol.eps_rank, tol.eps_norm)
    if len(cand) == 0:
        return VertexSet(np.empty((0, sys.n)))
    full = red.embed(cand)
    keep = []
    for x in full:
        eq_res, ge_vio = system_residual(sys, x)
        if eq_res <= tol.eps_norm and ge_vio <= tol.eps_norm:
            keep.append(x)
    return VertexSet(_dedup_points(np.array(keep), _VERTEX_DEDUP_TOL))


def vertex_active_rank(sys: LinearSystem, x: np.ndarray,
                       tol: Tolerance = DEFAULT_TOL) -> int:
    """Rank of equality rows plus inequality rows active at x (extremality check)."""
    rows = [sys.a_eq] if len(sys.a_eq) else []
    if len(sys.a_ge):
        active = np.abs(sys.a_ge @ x - sys.b_ge) <= 10 * _VERTEX_DEDUP_TOL
        if np.any(active):
            rows.append(sys.a_ge[active])
    if not rows:
        return 0
    stacked = np.vstack(rows)
    s = np.linalg.svd(stacked, compute_uv=False)
    return int(np.sum(s > tol.eps_rank * s[0])) if s.size and s[0] > 0 else 0


def _reduce_cone(sys: LinearSystem, tol: Tolerance):
    """Factor a homogeneous system into lineality and a pointed part.

    Returns (n1, w1, lin_z, pointed_basis, w2) where n1 embeds the equality
    nullspace, lin_z spans the lineality inside it, and w2 are the pointed
    cone's inequality rows over the pointed_basis coordinates.
    """
    n1 = nullspace(sys.a_eq, tol.eps_rank) if len(sys.a_eq) else np.eye(sys.n)
    if n1.shape[1] == 0:
        empty = np.empty((0, 0))
        return n1, empty, empty, np.empty((0, 0)), empty
    w1 = sys.a_ge @ n1 if len(sys.a_ge) else np.empty((0, n1.shape[1]))
    if len(w1):
        keep = np.max(np.abs(w1), axis=1) > _ZERO_ROW_TOL
        w1 = w1[keep]
    if len(w1) == 0:
        lin_z = np.eye(n1.shape[1])
        return n1, w1, lin_z, np.empty((n1.shape[1], 0)), np.empty((0, 0))
    lin_z = nullspace(w1, tol.eps_rank)
    basis = row_space_basis(w1, tol.eps_rank)
    w2 = w1 @ basis
    return n1, w1, lin_z, basis, w2


def enumerate_rays(sys: LinearSystem, tol: Tolerance = DEFAULT_TOL,
                   caps: Caps = DEFAULT_CAPS) -> RaySet:
    """Extreme rays of a homogeneous system, one unit generator per ray.

    Works inside the lineality-free reduced space, where the cone is
    pointed; any lineality found is reported on the result instead of
    being folded into rays.
    """
    if not sys.is_homogeneous(atol=0.0):
        raise ValueError("ray enumeration requires zero right-hand sides")
    n1, _, lin_z, basis, w2 = _reduce_cone(sys, tol)
    lineality = n1 @ lin_z if lin_z.size else np.empty((sys.n, 0))
    k = basis.shape[1]
    if k == 0:
        return RaySet(np.empty((0, sys.n)), lineality)
    _guard(len(w2), max(k - 1, 0), caps)
    cand = _backend.ray_candidates(np.ascontiguousarray(w2), tol.eps_rank, tol.eps_norm)
    if len(cand) == 0:
        return RaySet(np.empty((0, sys.n)), lineality)
    full = cand @ basis.T @ n1.T
    keep = []
    for r in full:
        norm = np.linalg.norm(r)
        if norm <= tol.eps_rank:
            continue
        r = r / norm
        eq_res = float(np.max(np.abs(sys.a_eq @ r))) if len(sys.a_eq) else 0.0
        ge_vio = float(np.max(-(sys.a_ge @ r))) if len(sys.a_ge) else 0.0
        if eq_res <= tol.eps_norm and ge_vio <= tol.eps_norm:
            keep.append(r)
    if not keep:
        return RaySet(np.empty((0, sys.n)), lineality)
    return RaySet(_dedup_points(np.array(keep), _VERTEX_DEDUP_TOL), lineality)


@dataclass(frozen=True)
class ConeTriviality:
    trivial: bool
    rays: RaySet
    lp_nontrivial: bool


def cone_triviality(sys: LinearSystem, tol: Tolerance = DEFAULT_TOL,
                    caps: Caps = DEFAULT_CAPS) -> ConeTriviality:
    """Decide whether a homogeneous system's cone is {0}.

    Ray enumeration decides; an LP on the pointed part cross-checks, and a
    disagreement raises :class:`ConsistencyError`.
    """
    rays = enumerate_rays(sys, tol, caps)
    enum_nontrivial = len(rays) > 0 or rays.lineality.shape[1] > 0
    _, _, lin_z, _, w2 = _reduce_cone(sys, tol)
    if lin_z.shape[1] > 0:
        lp_nontrivial = True
    elif w2.shape[1] == 0:
        lp_nontrivial = False
    else:
        lp_nontrivial = _recession_cone_nontrivial(w2, tol)
    if enum_nontrivial != lp_nontrivial:
        raise ConsistencyError(
            f"ray enumeration ({'non' if enum_nontrivial else ''}trivial) and LP "
            f"({'non' if lp_nontrivial else ''}trivial) disagree")
    return ConeTriviality(not enum_nontrivial, rays, lp_nontrivial)


def cone_is_trivial(sys: LinearSystem, tol: Tolerance = DEFAULT_TOL,
                    caps: Caps = DEFAULT_CAPS) -> bool:
    return cone_triviality(sys, tol, caps).trivial


def _phase_one_simplex(a: np.ndarray, b: np.ndarray, pivot_tol: float = 1e-9,
                       max_iter: int | None = None):
    """Minimize the sum of artificials for a x = b, x >= 0 (b >= 0 on entry).

    Bland's rule throughout: smallest improving column enters, ratio ties
    are broken by the smallest basic variable index.  Returns the feasible
    basic solution or None.
    """
    m, ncols = a.shape
    tableau = np.hstack([a, np.eye(m), b[:, None]])
    basis = np.arange(ncols, ncols + m)
    zrow = np.zeros(ncols + m + 1)
    zrow[:ncols] = a.sum(axis=0)
    zrow[-1] = b.sum()
    if max_iter is None:
        max_iter = 200 * (m + ncols) + 1000
    for _ in range(max_iter):
        improving = np.nonzero(zrow[:-1] > pivot_tol)[0]
        if improving.size == 0:
            break
        enter = int(improving[0])
        col = tableau[:, enter]
        rows = np.nonzero(col > 1e-11)[0]
        if rows.size == 0:
            raise SimplexCycleError("phase-one column unbounded; numerical trouble")
        ratios = tableau[rows, -1] / col[rows]
        best = np.min(ratios)
        ties = rows[ratios <= best + 1e-12]
        leave = int(ties[np.argmin(basis[ties])])
        pivot = tableau[leave, enter]
        tableau[leave] /= pivot
        others = np.arange(m) != leave
        tableau[others] -= np.outer(tableau[others, enter], tableau[leave])
        zrow -= zrow[enter] * tableau[leave]
        basis[leave] = enter
    else:
        raise SimplexCycleError("simplex iteration guard exceeded")
    if zrow[-1] > 1e-8 * max(1.0, float(b.sum())):
        return None
    x = np.zeros(ncols)
    for i, var in enumerate(basis):
        if var < ncols:
            x[var] = tableau[i, -1]
    return x


def lp_feasible(sys: LinearSystem, tol: Tolerance = DEFAULT_TOL):
    """Phase-one simplex feasibility; returns (verdict, feasible point or None)."""
    n = sys.n
    m_eq, m_ge = len(sys.b_eq), len(sys.b_ge)
    if m_eq + m_ge == 0:
        return True, np.zeros(n)
    ncols = 2 * n + m_ge
    a = np.zeros((m_eq + m_ge, ncols))
    a[:m_eq, :n] = sys.a_eq
    a[:m_eq, n:2 * n] = -sys.a_eq
    a[m_eq:, :n] = sys.a_ge
    a[m_eq:, n:2 * n] = -sys.a_ge
    a[m_eq:, 2 * n:] = -np.eye(m_ge)
    b = np.concatenate([sys.b_eq, sys.b_ge]).copy()
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0
    x_std = _phase_one_simplex(a, b)
    if x_std is None:
        return False, None
    x = x_std[:n] - x_std[n:2 * n]
    eq_res, ge_vio = system_residual(sys, x)
    scale = max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)
    if eq_res > tol.eps_norm * scale or ge_vio > tol.eps_norm * scale:
        raise NumericalError(
            f"simplex returned an infeasible point (residuals {eq_res}, {ge_vio})")
    return True, x
