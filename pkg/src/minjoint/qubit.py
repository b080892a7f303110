"""Dichotomic qubit observables and the closed-form minimality decision.

A dichotomic qubit observable is parametrized by a bias and a Bloch
vector; a joint observable of two of them by one more scalar and vector.
For linearly independent marginal vectors, minimality of the joint is a
finite set of sign conditions on four derived numbers (the w-vector),
plus special handling of zero effects and of pairwise proportional
effects.  Strict inequalities within ``delta_boundary`` of zero are
reported as BOUNDARY instead of being forced to a side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, NumericalError
from .minimality import BOUNDARY, Certificate, MINIMAL, MinimalityVerdict, NOT_MINIMAL
from .observables import (
    DEFAULT_TOL,
    MarkovKernel,
    Observable,
    Tolerance,
    kernel_preserves_equivalence,
    marginal,
    observables_close,
    post_process,
)

INVALID = "INVALID"

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=np.complex128)

_I2 = np.eye(2, dtype=np.complex128)

OUTCOMES = ("+", "-")
JOINT_OUTCOMES = (("+", "+"), ("+", "-"), ("-", "+"), ("-", "-"))


def _vec3(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


def bloch_effect(scalar: float, vec) -> np.ndarray:
    """The 2x2 matrix (scalar * I + vec . sigma) / 2."""
    vec = _vec3(vec)
    return 0.5 * (scalar * _I2 + np.tensordot(vec, PAULI, axes=1))


def bloch_parameters(matrix: np.ndarray):
    """Invert :func:`bloch_effect`: recover (scalar, vec) from a Hermitian 2x2 matrix."""
    scalar = float(np.real(np.trace(matrix)))
    vec = np.array([float(np.real(np.trace(matrix @ PAULI[k]))) for k in range(3)])
    return scalar, vec


@dataclass(frozen=True)
class BlochObservable:
    """Dichotomic qubit observable with effects (alpha I +- a . sigma) / 2."""

    alpha: float
    a: np.ndarray

    def __post_init__(self):
        a = _vec3(self.a)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        if not 0.0 <= self.alpha <= 2.0:
            raise ValueError("bias must lie in [0, 2]")
        bound = min(self.alpha, 2.0 - self.alpha)
        if np.linalg.norm(a) > bound + DEFAULT_TOL.eps_norm:
            raise ValueError(
                f"|a| = {np.linalg.norm(a)} exceeds min(alpha, 2 - alpha) = {bound}")


@dataclass(frozen=True)
class JointParams:
    """Parameters (gamma, g) of a candidate joint observable."""

    gamma: float
    g: np.ndarray

    def __post_init__(self):
        g = _vec3(self.g)
        g.setflags(write=False)
        object.__setattr__(self, "g", g)


@dataclass(frozen=True)
class SpanCoefficients:
    c1: float
    c2: float
    residual: float
    in_span: bool


@dataclass(frozen=True)
class WVector:
    w_pp: float
    w_pm: float
    w_mp: float
    w_mm: float

    def as_array(self) -> np.ndarray:
        return np.array([self.w_pp, self.w_pm, self.w_mp, self.w_mm])


@dataclass(frozen=True)
class PositivityReport:
    """Slack of each of the four positivity inequalities (nonnegative = satisfied)."""

    slacks: tuple
    ok: bool

    def failed(self) -> tuple:
        return tuple(i + 1 for i, s in enumerate(self.slacks) if s < 0)


def bloch_to_observable(obs: BlochObservable) -> Observable:
    # Normalization pins the "-" effect to I - E(+) = ((2 - alpha) I - a.sigma)/2.
    return Observable(OUTCOMES, (bloch_effect(obs.alpha, obs.a),
                                 bloch_effect(2.0 - obs.alpha, -obs.a)))


def joint_effect_parameters(a_obs: BlochObservable, b_obs: BlochObservable,
                            jp: JointParams):
    """(scalar, vector) pairs of the four joint effects, in product outcome order."""
    alpha, beta = a_obs.alpha, b_obs.alpha
    a, b, g = a_obs.a, b_obs.a, jp.g
    gamma = jp.gamma
    return (
        (gamma, g),
        (alpha - gamma, a - g),
        (beta - gamma, b - g),
        (2.0 + gamma - alpha - beta, g - a - b),
    )


def joint_positivity(a_obs: BlochObservable, b_obs: BlochObservable,
                     jp: JointParams) -> PositivityReport:
    slacks = tuple(float(s - np.linalg.norm(v))
                   for s, v in joint_effect_parameters(a_obs, b_obs, jp))
    return PositivityReport(slacks, min(slacks) >= -DEFAULT_TOL.eps_norm)


def joint_from_params(a_obs: BlochObservable, b_obs: BlochObservable,
                      jp: JointParams, tol: Tolerance = DEFAULT_TOL) -> Observable:
    """The four-outcome joint observable of the parametrization.

    Marginals reproduce the two dichotomic observables exactly by
    construction; positivity of all four effects is required.
    """
    report = joint_positivity(a_obs, b_obs, jp)
    if not report.ok:
        detail = ", ".join(f"(g{i}) short by {-report.slacks[i - 1]:.3g}"
                           for i in report.failed())
        raise ValueError(f"joint parameters violate positivity: {detail}")
    effects = tuple(bloch_effect(s, v)
                    for s, v in joint_effect_parameters(a_obs, b_obs, jp))
    return Observable(JOINT_OUTCOMES, effects)


def unbiased_compatible(a, b, delta: float = DEFAULT_TOL.delta_boundary) -> bool:
    """Busch criterion |a - b| + |a + b| <= 2 for unbiased pairs."""
    a, b = _vec3(a), _vec3(b)
    return float(np.linalg.norm(a - b) + np.linalg.norm(a + b)) <= 2.0 + delta


def vectors_independent(a, b, eps_rank: float = DEFAULT_TOL.eps_rank) -> bool:
    a, b = _vec3(a), _vec3(b)
    gaa, gbb, gab = float(a @ a), float(b @ b), float(a @ b)
    return gaa * gbb - gab * gab > eps_rank * gaa * gbb


def span_coefficients(g, a, b, tol: Tolerance = DEFAULT_TOL) -> SpanCoefficients:
    """Least-squares coefficients of g against the (independent) pair a, b.

    ``in_span`` is False when the residual exceeds eps_rank * |g|.
    """
    g, a, b = _vec3(g), _vec3(a), _vec3(b)
    if not vectors_independent(a, b, tol.eps_rank):
        raise ValueError("marginal vectors must be linearly independent")
    gram = np.array([[a @ a, a @ b], [a @ b, b @ b]])
    c = np.linalg.solve(gram, np.array([a @ g, b @ g]))
    residual = float(np.linalg.norm(g - c[0] * a - c[1] * b))
    return SpanCoefficients(float(c[0]), float(c[1]), residual,
                            residual <= tol.eps_rank * np.linalg.norm(g))


def w_vector(c1: float, c2: float, alpha: float, beta: float, gamma: float) -> WVector:
    """Solution direction of the homogeneous effect-weight system, in closed form."""
    return WVector(
        (2.0 - alpha) * c1 + (2.0 - beta) * c2 + gamma - 2.0,
        (2.0 - alpha) * c1 - beta * c2 + gamma,
        -alpha * c1 + (2.0 - beta) * c2 + gamma,
        -alpha * c1 - beta * c2 + gamma,
    )


def wmin_condition(w: WVector, delta: float = DEFAULT_TOL.delta_boundary) -> str:
    """Sign test on the two diagonal products of the w-vector."""
    best = max(w.w_pp * w.w_mm, w.w_pm * w.w_mp)
    if best > delta:
        return MINIMAL
    if best < -delta:
        return NOT_MINIMAL
    return BOUNDARY


_MINIMAL_DEPS = frozenset({"dep1", "dep2", "dep5", "dep6"})
_NONMINIMAL_DEPS = frozenset({"dep3", "dep4"})


def dep_conditions(a_obs: BlochObservable, b_obs: BlochObservable, jp: JointParams,
                   coeffs: SpanCoefficients,
                   delta: float = DEFAULT_TOL.delta_boundary) -> frozenset:
    """Which pairwise linear-dependence conditions hold, tested in (c1, c2) coordinates."""
    alpha, beta, gamma = a_obs.alpha, b_obs.alpha, jp.gamma
    c1, c2 = coeffs.c1, coeffs.c2
    hits = set()

    def near(x, y):
        return abs(x - c1) <= delta and abs(y - c2) <= delta

    if alpha > delta and near(gamma / alpha, 0.0):
        hits.add("dep1")
    if beta > delta and near(0.0, gamma / beta):
        hits.add("dep2")
    if abs(alpha + beta - 2.0) > delta:
        v = gamma / (alpha + beta - 2.0)
        if near(v, v):
            hits.add("dep3")
    if abs(alpha - beta) > delta:
        if near((gamma - beta) / (alpha - beta), (gamma - alpha) / (beta - alpha)):
            hits.add("dep4")
    if abs(beta - 2.0) > delta and near(1.0, (alpha - gamma) / (2.0 - beta)):
        hits.add("dep5")
    if abs(alpha - 2.0) > delta and near((beta - gamma) / (2.0 - alpha), 1.0):
        hits.add("dep6")
    return frozenset(hits)


# Sign patterns of the one-sided cones: entries at outcomes whose projected
# coordinate is "+" must be <= 0, the rest >= 0.  Outcome order (++, +-, -+, --).
_CONE_SIGNS = {
    0: np.array([-1.0, -1.0, 1.0, 1.0]),
    1: np.array([-1.0, 1.0, -1.0, 1.0]),
}


def _certificate_from_w(a_obs: BlochObservable, b_obs: BlochObservable,
                        jp: JointParams, w: WVector,
                        tol: Tolerance) -> Certificate:
    """Build a non-minimality witness kernel from the w-vector.

    A signed copy of w that fits one marginal's cone sign pattern perturbs
    the deterministic coordinate projection into a joint-preserving kernel
    supported on two distinct joint outcomes in one output row.
    """
    warr = w.as_array()
    choice = None
    for axis, signs in _CONE_SIGNS.items():
        for s in (1.0, -1.0):
            u = s * warr
            if np.all(u * signs >= -tol.delta_boundary):
                choice = (axis, u)
                break
        if choice:
            break
    if choice is None:
        raise NumericalError("w-vector fits no cone sign pattern")
    axis, u = choice
    u = u * (0.5 / np.max(np.abs(u)))
    joint = joint_from_params(a_obs, b_obs, jp, tol)
    outcomes = joint.outcomes
    t = len(outcomes)
    r_marg = np.zeros((2, t))
    for i, xp in enumerate(outcomes):
        plus = xp[axis] == "+"
        r_marg[0, i] = (1.0 if plus else 0.0) + u[i]
        r_marg[1, i] = (0.0 if plus else 1.0) - u[i]
    entries = np.zeros((t, t))
    other = 1 - axis
    for ip, xp in enumerate(outcomes):
        for i, x in enumerate(outcomes):
            if xp[other] == x[other]:
                entries[ip, i] = r_marg[0 if xp[axis] == "+" else 1, i]
    kernel = MarkovKernel(outcomes, outcomes, np.clip(entries, 0.0, None))
    i1 = int(np.argmax(np.where([x[axis] == "-" for x in outcomes], u, -np.inf)))
    x1 = outcomes[i1]
    x2 = tuple("+" if ax == axis else x1[ax] for ax in range(2))
    lower = post_process(kernel, joint)
    for ax, m_obs in enumerate((a_obs, b_obs)):
        if not observables_close(marginal(lower, ax), bloch_to_observable(m_obs),
                                 tol.eps_norm):
            raise NumericalError("certificate kernel does not preserve the marginals")
    if kernel_preserves_equivalence(kernel, joint, tol):
        raise NumericalError("certificate kernel does not lose information")
    return Certificate(kernel, (x1, x2, x2), lower)


def _zero_effects(a_obs, b_obs, jp, delta):
    flags = []
    for s, v in joint_effect_parameters(a_obs, b_obs, jp):
        flags.append(abs(s) <= delta and np.linalg.norm(v) <= delta)
    return flags


def qubit_is_minimal(a_obs: BlochObservable, b_obs: BlochObservable, jp: JointParams,
                     tol: Tolerance = DEFAULT_TOL) -> MinimalityVerdict:
    """Closed-form minimality decision for a dichotomic qubit joint observable.

    Requires linearly independent marginal vectors (otherwise the general
    algorithm applies) and positivity of the four joint effects.  Dispatch:
    an off-span g decides MINIMAL (and maximal); exactly one zero effect
    decides MINIMAL; the dependence conditions decide their fixed verdicts;
    otherwise the sign test on the w-vector decides.
    """
    delta = tol.delta_boundary
    a, b, g = a_obs.a, b_obs.a, jp.g
    if not vectors_independent(a, b, tol.eps_rank):
        raise ValueError(
            "marginal vectors are linearly dependent; use the general algorithm")
    report = joint_positivity(a_obs, b_obs, jp)
    if not report.ok:
        raise ValueError(f"positivity fails for inequalities {report.failed()}")
    trace: dict = {"positivity_slacks": report.slacks}

    zeros = _zero_effects(a_obs, b_obs, jp, delta)
    trace["zero_effects"] = int(sum(zeros))
    if sum(zeros) >= 2:
        raise ConsistencyError(
            "two zero effects coexist with independent marginal vectors")
    if sum(zeros) == 1:
        return MinimalityVerdict(MINIMAL, "zero_element", None, trace)

    span = span_coefficients(g, a, b, tol)
    trace["span"] = (span.c1, span.c2, span.residual)
    if not span.in_span:
        return MinimalityVerdict(MINIMAL, "independent", None, trace, maximal=True)

    deps = dep_conditions(a_obs, b_obs, jp, span, delta)
    trace["deps"] = sorted(deps)
    w = w_vector(span.c1, span.c2, a_obs.alpha, b_obs.alpha, jp.gamma)
    trace["w"] = tuple(w.as_array())
    if deps & _MINIMAL_DEPS:
        return MinimalityVerdict(MINIMAL, "dep", None, trace)
    if deps & _NONMINIMAL_DEPS:
        cert = _certificate_from_w(a_obs, b_obs, jp, w, tol)
        return MinimalityVerdict(NOT_MINIMAL, "dep", cert, trace)

    decision = wmin_condition(w, delta)
    cert = None
    if decision == NOT_MINIMAL:
        cert = _certificate_from_w(a_obs, b_obs, jp, w, tol)
    return MinimalityVerdict(decision, "wmin", cert, trace)


def unbiased_is_minimal(a, b, jp: JointParams,
                        tol: Tolerance = DEFAULT_TOL) -> MinimalityVerdict:
    """Specialized decision for unbiased marginals (both biases equal to one).

    The zero-effect case cannot occur here and the strip form of the sign
    test applies: the coefficient sum must lie strictly between gamma and
    2 - gamma, or the difference strictly within (-gamma, gamma).
    """
    delta = tol.delta_boundary
    a_obs = BlochObservable(1.0, _vec3(a))
    b_obs = BlochObservable(1.0, _vec3(b))
    if not vectors_independent(a_obs.a, b_obs.a, tol.eps_rank):
        raise ValueError(
            "marginal vectors are linearly dependent; use the general algorithm")
    report = joint_positivity(a_obs, b_obs, jp)
    if not report.ok:
        raise ValueError(f"positivity fails for inequalities {report.failed()}")
    gamma = jp.gamma
    if not 0.0 < gamma < 1.0:
        raise ConsistencyError(
            "a valid unbiased joint with independent marginal vectors forces "
            f"0 < gamma < 1; got {gamma}")
    trace: dict = {"positivity_slacks": report.slacks}
    if any(_zero_effects(a_obs, b_obs, jp, delta)):
        raise ConsistencyError(
            "unbiased joints with independent marginal vectors have no zero effects")

    span = span_coefficients(jp.g, a_obs.a, b_obs.a, tol)
    trace["span"] = (span.c1, span.c2, span.residual)
    if not span.in_span:
        return MinimalityVerdict(MINIMAL, "independent", None, trace, maximal=True)

    deps = dep_conditions(a_obs, b_obs, jp, span, delta)
    trace["deps"] = sorted(deps)
    if deps & _MINIMAL_DEPS:
        return MinimalityVerdict(MINIMAL, "dep", None, trace)

    total, diff = span.c1 + span.c2, span.c1 - span.c2
    margin = max(min(total - gamma, (2.0 - gamma) - total),
                 min(diff + gamma, gamma - diff))
    trace["strip_margin"] = margin
    if margin > delta:
        return MinimalityVerdict(MINIMAL, "wmin", None, trace)
    if margin < -delta:
        w = w_vector(span.c1, span.c2, 1.0, 1.0, gamma)
        cert = _certificate_from_w(a_obs, b_obs, jp, w, tol)
        return MinimalityVerdict(NOT_MINIMAL, "wmin", cert, trace)
    return MinimalityVerdict(BOUNDARY, "wmin", None, trace)


VERDICT_LABELS = (INVALID, MINIMAL, NOT_MINIMAL, BOUNDARY)


@dataclass(frozen=True)
class RegionScan:
    """Grid of minimality verdicts over the coefficient plane, row-major in c1."""

    c1_values: np.ndarray
    c2_values: np.ndarray
    codes: np.ndarray   # int8 indices into VERDICT_LABELS, shape (n1, n2)
    slacks: np.ndarray  # shape (n1, n2, 4)

    def verdict(self, i: int, j: int) -> str:
        return VERDICT_LABELS[self.codes[i, j]]

    def counts(self) -> dict:
        return {label: int(np.sum(self.codes == k))
                for k, label in enumerate(VERDICT_LABELS)}

    def write_csv(self, stream):
        stream.write("c1,c2,verdict,slack_g1,slack_g2,slack_g3,slack_g4\n")
        for i, c1 in enumerate(self.c1_values):
            for j, c2 in enumerate(self.c2_values):
                s = [repr(float(v)) for v in self.slacks[i, j]]
                stream.write(f"{float(c1)!r},{float(c2)!r},"
                             f"{VERDICT_LABELS[self.codes[i, j]]},{','.join(s)}\n")


def region_scan(a, b, gamma: float, c1_range=(-1.0, 2.0), c2_range=(-1.0, 2.0),
                grid_n: int = 201, tol: Tolerance = DEFAULT_TOL) -> RegionScan:
    """Classify every grid point g = c1 a + c2 b for unbiased marginals.

    Cells failing positivity are INVALID; valid cells get the closed-form
    verdict with the usual boundary band.
    """
    a, b = _vec3(a), _vec3(b)
    if not vectors_independent(a, b, tol.eps_rank):
        raise ValueError("marginal vectors must be linearly independent")
    if grid_n < 2 or c1_range[0] >= c1_range[1] or c2_range[0] >= c2_range[1]:
        raise ValueError("degenerate grid")
    delta = tol.delta_boundary
    c1s = np.linspace(c1_range[0], c1_range[1], grid_n)
    c2s = np.linspace(c2_range[0], c2_range[1], grid_n)
    c1g, c2g = np.meshgrid(c1s, c2s, indexing="ij")
    g = c1g[..., None] * a + c2g[..., None] * b

    def norms(v):
        return np.linalg.norm(v, axis=-1)

    slacks = np.stack([
        gamma - norms(g),
        (1.0 - gamma) - norms(a - g),
        (1.0 - gamma) - norms(b - g),
        gamma - norms(a + b - g),
    ], axis=-1)
    invalid = np.min(slacks, axis=-1) < 0.0

    dep_points = ((gamma, 0.0), (0.0, gamma), (1.0, 1.0 - gamma), (1.0 - gamma, 1.0))
    dep = np.zeros_like(invalid)
    for p1, p2 in dep_points:
        dep |= (np.abs(c1g - p1) <= delta) & (np.abs(c2g - p2) <= delta)

    total, diff = c1g + c2g, c1g - c2g
    margin = np.maximum(np.minimum(total - gamma, (2.0 - gamma) - total),
                        np.minimum(diff + gamma, gamma - diff))

    codes = np.full(c1g.shape, VERDICT_LABELS.index(BOUNDARY), dtype=np.int8)
    codes[margin > delta] = VERDICT_LABELS.index(MINIMAL)
    codes[margin < -delta] = VERDICT_LABELS.index(NOT_MINIMAL)
    codes[dep] = VERDICT_LABELS.index(MINIMAL)
    codes[invalid] = VERDICT_LABELS.index(INVALID)
    return RegionScan(c1s, c2s, codes, slacks)
