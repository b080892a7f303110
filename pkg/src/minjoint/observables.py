"""Finite-outcome observables, Markov kernels, and the post-processing order.

An observable assigns a positive semidefinite effect to each outcome of a
finite outcome set, with the effects summing to the identity.  Markov
kernels (column-stochastic real matrices) act on observables by mixing
outcomes; whether one observable is a post-processing of another is a
linear feasibility question and is decided here by the phase-one simplex
in :mod:`minjoint.polyhedra`.

All types are immutable values; every operation is a pure function.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from ._linalg import hs_inner, hs_norm
from .errors import NumericalError

Label = Union[str, int, tuple]

# Constructor-level slack for kernel invariants.  Looser than eps_norm so
# that kernels assembled from enumeration output (residuals ~1e-12) and
# n-fold products are accepted, tight enough to catch real bugs.
_KERNEL_ATOL = 1e-8


@dataclass(frozen=True)
class Tolerance:
    """Numerical tolerance policy.

    eps_herm / eps_pos / eps_norm are absolute (effects are bounded by the
    identity, so absolute and relative scales coincide); eps_rank is
    relative; delta_boundary guards strict-inequality decisions.
    """

    eps_herm: float = 1e-9
    eps_pos: float = 1e-10
    eps_norm: float = 1e-9
    eps_rank: float = 1e-9
    delta_boundary: float = 1e-7

    def __post_init__(self):
        for name in ("eps_herm", "eps_pos", "eps_norm", "eps_rank", "delta_boundary"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


DEFAULT_TOL = Tolerance()


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise ValueError("entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Effect:
    """A single measurement effect: a d x d complex matrix.

    Hermiticity and positivity are numerical properties reported by
    :func:`validate_observable`; the constructor only enforces shape.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.entries, np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("effect must be a square matrix")
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def hs_norm(self) -> float:
        return hs_norm(self.entries)

    def is_zero(self, eps_rank: float = DEFAULT_TOL.eps_rank) -> bool:
        return self.hs_norm() <= eps_rank

    def herm_residual(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def min_eigenvalue(self) -> float:
        sym = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(sym)[0])


@dataclass(frozen=True)
class Observable:
    """A finite family of effects indexed by an ordered outcome set."""

    outcomes: tuple
    effects: tuple

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        effects = tuple(e if isinstance(e, Effect) else Effect(e) for e in self.effects)
        if not outcomes:
            raise ValueError("outcome set must be nonempty")
        if len(outcomes) != len(set(outcomes)):
            raise ValueError("outcome labels must be distinct")
        if len(outcomes) != len(effects):
            raise ValueError("one effect per outcome required")
        dims = {e.dim for e in effects}
        if len(dims) != 1:
            raise ValueError("all effects must share one dimension")
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    @property
    def n_outcomes(self) -> int:
        return len(self.outcomes)

    def index(self, label) -> int:
        return self.outcomes.index(label)

    def effect(self, label) -> Effect:
        return self.effects[self.index(label)]

    def as_array(self) -> np.ndarray:
        return np.stack([e.entries for e in self.effects])


@dataclass(frozen=True)
class MarkovKernel:
    """Column-stochastic nonnegative matrix p(x, y), x in out_set, y in in_set."""

    out_set: tuple
    in_set: tuple
    entries: np.ndarray

    def __post_init__(self):
        out_set = tuple(self.out_set)
        in_set = tuple(self.in_set)
        arr = _frozen_array(self.entries, np.float64)
        if arr.shape != (len(out_set), len(in_set)):
            raise ValueError("entry matrix shape must be (|out|, |in|)")
        if len(out_set) != len(set(out_set)) or len(in_set) != len(set(in_set)):
            raise ValueError("label sets must have distinct labels")
        if np.min(arr) < -_KERNEL_ATOL:
            raise ValueError(f"kernel entries must be nonnegative, min {np.min(arr)}")
        colsums = arr.sum(axis=0)
        worst = float(np.max(np.abs(colsums - 1.0)))
        if worst > _KERNEL_ATOL * max(1, len(out_set)):
            raise ValueError(f"kernel columns must sum to one, worst residual {worst}")
        object.__setattr__(self, "out_set", out_set)
        object.__setattr__(self, "in_set", in_set)
        object.__setattr__(self, "entries", arr)


def identity_kernel(labels) -> MarkovKernel:
    labels = tuple(labels)
    return MarkovKernel(labels, labels, np.eye(len(labels)))


def constant_kernel(out_set, in_set) -> MarkovKernel:
    """Kernel with every column the uniform distribution on out_set."""
    out_set, in_set = tuple(out_set), tuple(in_set)
    entries = np.full((len(out_set), len(in_set)), 1.0 / len(out_set))
    return MarkovKernel(out_set, in_set, entries)


@dataclass(frozen=True)
class ValidationReport:
    herm_residuals: tuple
    min_eigenvalues: tuple
    normalization_residual: float
    passed: bool


def validate_observable(obs: Observable, tol: Tolerance = DEFAULT_TOL) -> ValidationReport:
    """Report per-effect Hermiticity and positivity plus the normalization residual."""
    herm = tuple(e.herm_residual() for e in obs.effects)
    eigs = tuple(e.min_eigenvalue() for e in obs.effects)
    total = obs.as_array().sum(axis=0)
    norm_res = float(np.max(np.abs(total - np.eye(obs.dim))))
    passed = (
        max(herm) <= tol.eps_herm
        and min(eigs) >= -tol.eps_pos
        and norm_res <= tol.eps_norm
    )
    return ValidationReport(herm, eigs, norm_res, passed)


def post_process(p: MarkovKernel, obs: Observable) -> Observable:
    """The observable x -> sum_y p(x, y) A(y)."""
    if p.in_set != obs.outcomes:
        raise ValueError("kernel input labels must match the observable outcomes")
    new = np.einsum("xy,yij->xij", p.entries, obs.as_array())
    return Observable(p.out_set, tuple(new))


def compose_kernels(p: MarkovKernel, q: MarkovKernel) -> MarkovKernel:
    """(p * q)(x, x') = sum_y p(x, y) q(y, x')."""
    if p.in_set != q.out_set:
        raise ValueError("inner label sets must match")
    return MarkovKernel(p.out_set, q.in_set, p.entries @ q.entries)


def product_structure(outcomes: Sequence) -> list:
    """Per-coordinate factor sets of a product outcome set.

    The labels must be equal-length tuples covering the full cartesian
    product of the factor sets (in any order).
    """
    outcomes = tuple(outcomes)
    if not all(isinstance(x, tuple) for x in outcomes):
        raise ValueError("outcome set does not carry product structure")
    lengths = {len(x) for x in outcomes}
    if len(lengths) != 1:
        raise ValueError("outcome set does not carry product structure")
    n = lengths.pop()
    factors = []
    for axis in range(n):
        seen = []
        for x in outcomes:
            if x[axis] not in seen:
                seen.append(x[axis])
        factors.append(tuple(seen))
    expected = set(itertools.product(*factors))
    if set(outcomes) != expected or len(outcomes) != len(expected):
        raise ValueError("outcome set does not carry product structure")
    return factors


def marginal(obs: Observable, axis: int) -> Observable:
    """Coordinate marginal of an observable on a product outcome set."""
    factors = product_structure(obs.outcomes)
    if not 0 <= axis < len(factors):
        raise ValueError(f"axis {axis} out of range for {len(factors)} factors")
    arr = obs.as_array()
    effects = []
    for value in factors[axis]:
        mask = [x[axis] == value for x in obs.outcomes]
        effects.append(arr[mask].sum(axis=0))
    return Observable(factors[axis], tuple(effects))


def observables_close(a: Observable, b: Observable, atol: float) -> bool:
    if a.outcomes != b.outcomes or a.dim != b.dim:
        return False
    return bool(np.max(np.abs(a.as_array() - b.as_array())) <= atol)


def is_joint_observable(obs: Observable, marginals: Sequence[Observable],
                        tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff every coordinate marginal matches and the joint validates."""
    marginals = list(marginals)
    if any(m.dim != obs.dim for m in marginals):
        raise ValueError("dimension mismatch between joint and marginals")
    try:
        factors = product_structure(obs.outcomes)
    except ValueError:
        return False
    if len(factors) != len(marginals):
        return False
    if not validate_observable(obs, tol).passed:
        return False
    for axis, m in enumerate(marginals):
        if not observables_close(marginal(obs, axis), m, tol.eps_norm):
            return False
    return True


def product_kernel(kernels: Sequence[MarkovKernel]) -> MarkovKernel:
    """p((x_1, ..., x_n), y) = prod_l p_l(x_l, y) on a shared input set."""
    kernels = list(kernels)
    if not kernels:
        raise ValueError("need at least one kernel")
    in_set = kernels[0].in_set
    if any(k.in_set != in_set for k in kernels):
        raise ValueError("all kernels must share the input label set")
    out_set = tuple(itertools.product(*[k.out_set for k in kernels]))
    entries = np.ones((len(out_set), len(in_set)))
    for row, combo in enumerate(itertools.product(*[range(len(k.out_set)) for k in kernels])):
        for k, i in zip(kernels, combo):
            entries[row] *= k.entries[i]
    return MarkovKernel(out_set, in_set, entries)


def joint_from_common(common: Observable, kernels: Sequence[MarkovKernel],
                      tol: Tolerance = DEFAULT_TOL) -> Observable:
    """Joint observable of the post-processings p_l * C, built through the product kernel."""
    kernels = list(kernels)
    for k in kernels:
        if k.in_set != common.outcomes:
            raise ValueError("kernel input labels must match the common observable")
    joint = post_process(product_kernel(kernels), common)
    for axis, k in enumerate(kernels):
        want = post_process(k, common)
        if not observables_close(marginal(joint, axis), want, tol.eps_norm):
            raise NumericalError(f"marginal {axis} does not reproduce its post-processing")
    return joint


def pair_linearly_independent(e1: Effect, e2: Effect,
                              tol: Tolerance = DEFAULT_TOL) -> bool:
    """Linear independence of two effects by a relative Gram-determinant test."""
    if e1.dim != e2.dim:
        raise ValueError("dimension mismatch")
    g11 = hs_inner(e1.entries, e1.entries)
    g22 = hs_inner(e2.entries, e2.entries)
    g12 = hs_inner(e1.entries, e2.entries)
    return g11 * g22 - g12 * g12 > tol.eps_rank * g11 * g22


def pairwise_linearly_independent(obs: Observable, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff every pair of distinct effects is linearly independent."""
    for i in range(obs.n_outcomes):
        for j in range(i + 1, obs.n_outcomes):
            if not pair_linearly_independent(obs.effects[i], obs.effects[j], tol):
                return False
    return True


def pairwise_reduce(obs: Observable, tol: Tolerance = DEFAULT_TOL):
    """Canonical pairwise linearly independent representative of an observable.

    Zero effects are dropped and maximal groups of mutually proportional
    effects are merged by summing.  Returns ``(reduced, forward, backward)``
    with ``reduced = forward * obs`` and ``obs = backward * reduced``.

    Group membership uses the transitive closure of pairwise proportionality;
    with exact proportionality this is an equivalence relation, and chains
    that only close within tolerance are accepted as a tolerance artifact.
    """
    n = obs.n_outcomes
    zero = [e.is_zero(tol.eps_rank) for e in obs.effects]
    if all(zero):
        raise ValueError("all effects are zero; not a valid observable")

    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        if zero[i]:
            continue
        for j in range(i + 1, n):
            if zero[j]:
                continue
            if not pair_linearly_independent(obs.effects[i], obs.effects[j], tol):
                parent[find(j)] = find(i)

    groups = []  # ordered by first member
    root_to_group = {}
    for i in range(n):
        if zero[i]:
            continue
        r = find(i)
        if r not in root_to_group:
            root_to_group[r] = len(groups)
            groups.append([])
        groups[root_to_group[r]].append(i)

    arr = obs.as_array()
    merged = [arr[g].sum(axis=0) for g in groups]
    labels = tuple(obs.outcomes[g[0]] for g in groups)
    reduced = Observable(labels, tuple(merged))

    forward = np.zeros((len(groups), n))
    for gi, g in enumerate(groups):
        for i in g:
            forward[gi, i] = 1.0
    for i in range(n):
        if zero[i]:
            forward[0, i] = 1.0  # zero effects mixed into the first group

    backward = np.zeros((n, len(groups)))
    for gi, g in enumerate(groups):
        denom = hs_inner(merged[gi], merged[gi])
        for i in g:
            backward[i, gi] = hs_inner(arr[i], merged[gi]) / denom
    return (
        reduced,
        MarkovKernel(labels, obs.outcomes, forward),
        MarkovKernel(obs.outcomes, labels, backward),
    )


def kernel_preserves_equivalence(p: MarkovKernel, obs: Observable,
                                 tol: Tolerance = DEFAULT_TOL) -> bool:
    """True exactly when p * A is post-processing equivalent to A.

    The support criterion: no output row of the kernel may be supported on
    two linearly independent effects.
    """
    if p.in_set != obs.outcomes:
        raise ValueError("kernel input labels must match the observable outcomes")
    n = obs.n_outcomes
    indep = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            indep[i, j] = pair_linearly_independent(obs.effects[i], obs.effects[j], tol)
    for row in p.entries:
        for i in range(n):
            for j in range(i + 1, n):
                if indep[i, j] and row[i] * row[j] > tol.eps_rank:
                    return False
    return True


def is_postprocessing_of(a: Observable, b: Observable, tol: Tolerance = DEFAULT_TOL):
    """Decide a <= b in the post-processing order; return a witness kernel when true."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    from .minimality import build_K_system
    from .polyhedra import lp_feasible

    feasible, point = lp_feasible(build_K_system(a, b), tol)
    if not feasible:
        return False, None
    entries = np.clip(point.reshape(a.n_outcomes, b.n_outcomes), 0.0, None)
    return True, MarkovKernel(a.outcomes, b.outcomes, entries)
