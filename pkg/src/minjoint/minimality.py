"""Post-processing minimality of joint observables.

Builds the joint-preserving kernel polytope K_G and the witness polytopes
K(A, B), probes them through the averaged extreme-point kernels, checks
the support criterion on pairs of linearly independent effects, and, for
pairwise linearly independent joints, decides through triviality of the
per-marginal constraint cones.  NOT_MINIMAL verdicts always carry a
verified certificate kernel together with a strictly lower joint
observable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ._linalg import flatten_family, numerical_rank
from .errors import ConsistencyError, EnumerationCapError, NumericalError
from .observables import (
    DEFAULT_TOL,
    MarkovKernel,
    Observable,
    Tolerance,
    is_joint_observable,
    kernel_preserves_equivalence,
    pair_linearly_independent,
    pairwise_linearly_independent,
    post_process,
    product_kernel,
)
from .polyhedra import (
    Caps,
    DEFAULT_CAPS,
    LinearSystem,
    cone_triviality,
    enumerate_vertices,
    system_residual,
)

MINIMAL = "MINIMAL"
NOT_MINIMAL = "NOT_MINIMAL"
BOUNDARY = "BOUNDARY"


@dataclass(frozen=True)
class JointInstance:
    """A joint observable together with the marginals it must keep reproducing.

    The joint's outcome set must be the cartesian product of the marginal
    outcome sets in product (row-major) order; this pins down the variable
    layout of every constraint system built from the instance.
    """

    marginals: tuple
    joint: Observable
    tol: Tolerance = DEFAULT_TOL

    def __post_init__(self):
        marginals = tuple(self.marginals)
        if not marginals:
            raise ValueError("need at least one marginal")
        expected = tuple(itertools.product(*[m.outcomes for m in marginals]))
        if self.joint.outcomes != expected:
            raise ValueError(
                "joint outcomes must be the cartesian product of the marginal "
                "outcomes in product order")
        if not is_joint_observable(self.joint, marginals, self.tol):
            raise ValueError("joint does not reproduce the declared marginals")
        object.__setattr__(self, "marginals", marginals)

    @property
    def n_axes(self) -> int:
        return len(self.marginals)


@dataclass(frozen=True)
class Certificate:
    """Witness of non-minimality: a joint-preserving kernel that loses information."""

    kernel: MarkovKernel
    triple: tuple  # (x1, x2, x_prime): outputs collide on an independent pair
    lower_joint: Observable


@dataclass(frozen=True)
class MinimalityVerdict:
    decision: str
    method: str
    certificate: Certificate | None
    trace: dict = field(default_factory=dict)
    maximal: bool = False


@dataclass(frozen=True)
class SupportCheck:
    ok: bool
    max_product: float
    triple: tuple | None
    boundary: bool


def build_K_system(a: Observable, b: Observable) -> LinearSystem:
    """Linear system cutting out K(A, B), the kernels p with p * B = A.

    Variables are p(x, y) flattened row-major over (A outcomes, B outcomes):
    nonnegativity, unit column sums, and the operator equalities expanded
    into d**2 real coordinates each.
    """
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    na, nb = a.n_outcomes, b.n_outcomes
    nvars = na * nb
    flat_a = flatten_family([e.entries for e in a.effects])
    flat_b = flatten_family([e.entries for e in b.effects])
    d2 = flat_a.shape[1]
    eq_rows = np.zeros((nb + na * d2, nvars))
    eq_rhs = np.zeros(nb + na * d2)
    for y in range(nb):
        eq_rows[y, y::nb] = 1.0
        eq_rhs[y] = 1.0
    r = nb
    for x in range(na):
        for c in range(d2):
            eq_rows[r, x * nb:(x + 1) * nb] = flat_b[:, c]
            eq_rhs[r] = flat_a[x, c]
            r += 1
    return LinearSystem(nvars, eq_rows, eq_rhs, np.eye(nvars), np.zeros(nvars))


def build_KG_system(inst: JointInstance) -> LinearSystem:
    """Linear system cutting out K_G, the kernels keeping the joint a joint.

    Variables are p(x', x) flattened row-major over (joint outcomes, joint
    outcomes); the marginal operator equalities sum kernel rows over the
    fibers of each coordinate projection.
    """
    outcomes = inst.joint.outcomes
    t = len(outcomes)
    nvars = t * t
    flat_g = flatten_family([e.entries for e in inst.joint.effects])
    d2 = flat_g.shape[1]
    n_marg_rows = sum(m.n_outcomes for m in inst.marginals) * d2
    eq_rows = np.zeros((t + n_marg_rows, nvars))
    eq_rhs = np.zeros(t + n_marg_rows)
    for x in range(t):
        eq_rows[x, x::t] = 1.0
        eq_rhs[x] = 1.0
    r = t
    for axis, marg in enumerate(inst.marginals):
        flat_m = flatten_family([e.entries for e in marg.effects])
        for xi, x_val in enumerate(marg.outcomes):
            fiber = [ip for ip, xp in enumerate(outcomes) if xp[axis] == x_val]
            for c in range(d2):
                for ip in fiber:
                    eq_rows[r, ip * t:(ip + 1) * t] = flat_g[:, c]
                eq_rhs[r] = flat_m[xi, c]
                r += 1
    return LinearSystem(nvars, eq_rows, eq_rhs, np.eye(nvars), np.zeros(nvars))


def build_cone_system(inst: JointInstance, axis: int) -> LinearSystem:
    """Homogeneous system for the constraint cone of one marginal.

    Variables u(x', x) over (marginal outcomes, joint outcomes): the
    effect-weighted row sums vanish, each column sums to zero, and signs
    are pinned by whether x' matches the projected coordinate of x.
    """
    marg = inst.marginals[axis]
    outcomes = inst.joint.outcomes
    t = len(outcomes)
    nl = marg.n_outcomes
    nvars = nl * t
    flat_g = flatten_family([e.entries for e in inst.joint.effects])
    d2 = flat_g.shape[1]
    eq_rows = np.zeros((nl * d2 + t, nvars))
    r = 0
    for x in range(nl):
        for c in range(d2):
            eq_rows[r, x * t:(x + 1) * t] = flat_g[:, c]
            r += 1
    for i in range(t):
        eq_rows[r, i::t] = 1.0
        r += 1
    a_ge = np.zeros((nvars, nvars))
    for x, x_val in enumerate(marg.outcomes):
        for i, xp in enumerate(outcomes):
            sign = -1.0 if xp[axis] == x_val else 1.0
            a_ge[x * t + i, x * t + i] = sign
    return LinearSystem(nvars, eq_rows, np.zeros(len(eq_rows)), a_ge, np.zeros(nvars))


def p_star(inst: JointInstance, caps: Caps = DEFAULT_CAPS) -> MarkovKernel:
    """Uniform average of the extreme points of K_G."""
    t = len(inst.joint.outcomes)
    vs = enumerate_vertices(build_KG_system(inst), inst.tol, caps)
    if len(vs) == 0:
        raise NumericalError("K_G has no vertices; the identity kernel is always feasible")
    entries = vs.vertices.mean(axis=0).reshape(t, t)
    return MarkovKernel(inst.joint.outcomes, inst.joint.outcomes, entries)


def q_bar(inst: JointInstance, axis: int, caps: Caps = DEFAULT_CAPS) -> MarkovKernel:
    """Uniform average of the extreme points of K(A_axis, G)."""
    marg = inst.marginals[axis]
    vs = enumerate_vertices(build_K_system(marg, inst.joint), inst.tol, caps)
    if len(vs) == 0:
        raise NumericalError(
            f"K(A_{axis}, G) has no vertices; marginals always admit a witness")
    entries = vs.vertices.mean(axis=0).reshape(marg.n_outcomes, len(inst.joint.outcomes))
    return MarkovKernel(marg.outcomes, inst.joint.outcomes, entries)


def q_star(inst: JointInstance, caps: Caps = DEFAULT_CAPS) -> MarkovKernel:
    """Conditionally independent product of the averaged marginal witnesses.

    Lies in K_G by construction; membership is asserted numerically.
    """
    kernel = product_kernel([q_bar(inst, axis, caps) for axis in range(inst.n_axes)])
    eq_res, ge_vio = system_residual(build_KG_system(inst), kernel.entries.flatten())
    if eq_res > inst.tol.eps_norm or ge_vio > inst.tol.eps_norm:
        raise NumericalError(f"q_star left K_G (residuals {eq_res}, {ge_vio})")
    return kernel


def check_support_condition(kernel: MarkovKernel, joint: Observable,
                            tol: Tolerance = DEFAULT_TOL) -> SupportCheck:
    """Largest same-row product of kernel weights on linearly independent effects.

    The condition holds when every such product is at most delta_boundary;
    products inside (delta, 10 delta) are flagged as boundary rather than
    silently decided.
    """
    if kernel.in_set != joint.outcomes:
        raise ValueError("kernel input labels must match the joint outcomes")
    n = joint.n_outcomes
    indep = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            indep[i, j] = pair_linearly_independent(joint.effects[i], joint.effects[j], tol)
    worst = 0.0
    triple = None
    for row_idx, row in enumerate(kernel.entries):
        prod = np.abs(np.outer(row, row))
        prod[~indep] = 0.0
        val = float(prod.max())
        if val > worst:
            i, j = np.unravel_index(int(prod.argmax()), prod.shape)
            worst = val
            triple = (joint.outcomes[i], joint.outcomes[j], kernel.out_set[row_idx])
    delta = tol.delta_boundary
    return SupportCheck(worst <= delta, worst, triple if worst > delta else None,
                        delta < worst <= 10 * delta)


def _support_decision(check: SupportCheck, delta: float) -> str:
    if check.max_product <= delta:
        return MINIMAL
    if check.max_product <= 10 * delta:
        return BOUNDARY
    return NOT_MINIMAL


def _combine(dec_a: str, dec_b: str) -> str:
    if dec_a == dec_b:
        return dec_a
    if BOUNDARY in (dec_a, dec_b):
        return BOUNDARY
    raise ConsistencyError(f"support decisions disagree: {dec_a} vs {dec_b}")


def _verify_certificate(inst: JointInstance, cert: Certificate):
    eq_res, ge_vio = system_residual(build_KG_system(inst),
                                     cert.kernel.entries.flatten())
    if eq_res > inst.tol.eps_norm or ge_vio > inst.tol.eps_norm:
        raise NumericalError(
            f"certificate kernel left K_G (residuals {eq_res}, {ge_vio})")
    if kernel_preserves_equivalence(cert.kernel, inst.joint, inst.tol):
        raise NumericalError("certificate kernel does not lose information")


def _certificate_from_cone_ray(inst: JointInstance, axis: int,
                               ray: np.ndarray) -> Certificate:
    """Replay the constructive step of the cone criterion on a nontrivial ray.

    The ray, scaled below one in absolute value, perturbs the deterministic
    coordinate projection into a kernel of K(A_axis, G); tensoring with
    identity on the other coordinates gives a joint-preserving kernel whose
    some output row touches two distinct joint outcomes.
    """
    marg = inst.marginals[axis]
    outcomes = inst.joint.outcomes
    t = len(outcomes)
    u = ray.reshape(marg.n_outcomes, t)
    u = u * (0.5 / np.max(np.abs(u)))
    best = None
    for x, x_val in enumerate(marg.outcomes):
        for i, xp in enumerate(outcomes):
            if xp[axis] != x_val and u[x, i] > 0:
                if best is None or u[x, i] > u[best[0], best[1]]:
                    best = (x, i)
    if best is None:
        raise NumericalError("cone ray has no positive off-fiber entry")
    x0, i1 = best
    r_marg = np.array([[1.0 if xp[axis] == x_val else 0.0 for xp in outcomes]
                       for x_val in marg.outcomes])
    r_marg = r_marg + u
    entries = np.zeros((t, t))
    index_of = {v: k for k, v in enumerate(marg.outcomes)}
    for ip, xp in enumerate(outcomes):
        for i, x in enumerate(outcomes):
            if all(xp[ax] == x[ax] for ax in range(len(xp)) if ax != axis):
                entries[ip, i] = r_marg[index_of[xp[axis]], i]
    kernel = MarkovKernel(outcomes, outcomes, entries)
    x1 = outcomes[i1]
    x2 = tuple(marg.outcomes[x0] if ax == axis else x1[ax] for ax in range(len(x1)))
    cert = Certificate(kernel, (x1, x2, x2), post_process(kernel, inst.joint))
    _verify_certificate(inst, cert)
    return cert


def is_minimal(inst: JointInstance, caps: Caps = DEFAULT_CAPS,
               cross_check: bool = True) -> MinimalityVerdict:
    """Decide minimality of a joint observable.

    Dispatch: linearly independent nonzero effects decide immediately;
    pairwise linearly independent joints go through the marginal cones;
    everything else is decided by the support condition on the averaged
    conditionally independent kernel, cross-checked against the averaged
    K_G extreme-point kernel whenever that enumeration fits the caps.  The
    two support verdicts must agree beyond the boundary band.
    """
    joint = inst.joint
    tol = inst.tol
    delta = tol.delta_boundary
    trace: dict = {}

    nonzero = [i for i, e in enumerate(joint.effects) if not e.is_zero(tol.eps_rank)]
    rank = numerical_rank(
        flatten_family([joint.effects[i].entries for i in nonzero]), tol.eps_rank)
    trace["nonzero_effects"] = len(nonzero)
    trace["nonzero_rank"] = rank
    if rank == len(nonzero):
        maximal = len(nonzero) == joint.n_outcomes
        return MinimalityVerdict(MINIMAL, "independent", None, trace, maximal)

    if pairwise_linearly_independent(joint, tol):
        witness = None
        trivial = True
        for axis in range(inst.n_axes):
            ct = cone_triviality(build_cone_system(inst, axis), tol, caps)
            trace[f"cone_rays_{axis}"] = len(ct.rays)
            if not ct.trivial:
                trivial = False
                if witness is None and len(ct.rays):
                    witness = (axis, ct.rays.rays[0])
        if trivial:
            return MinimalityVerdict(MINIMAL, "cones", None, trace)
        if witness is None:
            raise NumericalError("nontrivial cone produced no usable ray")
        cert = _certificate_from_cone_ray(inst, *witness)
        return MinimalityVerdict(NOT_MINIMAL, "cones", cert, trace)

    qs = q_star(inst, caps)
    check_q = check_support_condition(qs, joint, tol)
    dec_q = _support_decision(check_q, delta)
    trace["q_star_max_product"] = check_q.max_product
    decision = dec_q
    method = "q_star"
    if cross_check:
        try:
            ps = p_star(inst, caps)
        except EnumerationCapError as exc:
            trace["p_star"] = f"skipped: {exc}"
        else:
            check_p = check_support_condition(ps, joint, tol)
            dec_p = _support_decision(check_p, delta)
            trace["p_star_max_product"] = check_p.max_product
            decision = _combine(dec_q, dec_p)
            method = "q_star+p_star"
    certificate = None
    if decision == NOT_MINIMAL:
        certificate = Certificate(qs, check_q.triple, post_process(qs, joint))
        _verify_certificate(inst, certificate)
    return MinimalityVerdict(decision, method, certificate, trace)


@dataclass(frozen=True)
class DescentResult:
    joint: Observable
    history: tuple
    converged: bool
    status: str


def descend_to_minimal(inst: JointInstance, cap: int = 64,
                       caps: Caps = DEFAULT_CAPS) -> DescentResult:
    """Iterate G <- p_star * G until a minimal joint observable is reached.

    Each step stays inside the joint-observable set by construction and is
    revalidated; convergence within ``cap`` steps is not guaranteed by
    theory, so exhaustion is reported as NOT_CONVERGED rather than hidden.
    """
    current = inst
    history = []
    for _ in range(cap):
        verdict = is_minimal(current, caps)
        history.append(verdict)
        if verdict.decision == MINIMAL:
            return DescentResult(current.joint, tuple(history), True, MINIMAL)
        if verdict.decision == BOUNDARY:
            return DescentResult(current.joint, tuple(history), False, BOUNDARY)
        step = p_star(current, caps)
        current = JointInstance(current.marginals,
                                post_process(step, current.joint), current.tol)
    return DescentResult(current.joint, tuple(history), False, "NOT_CONVERGED")
