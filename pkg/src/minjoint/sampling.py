"""Seeded random generators for observables, kernels, and qubit instances.

The qubit samplers rejection-sample until every quantity that feeds a
strict-inequality decision sits well clear of zero, so that batch runs
compare decisive verdicts rather than boundary noise.
"""

from __future__ import annotations

import numpy as np

from .observables import DEFAULT_TOL, MarkovKernel, Observable, Tolerance
from .qubit import (
    BlochObservable,
    JointParams,
    dep_conditions,
    joint_effect_parameters,
    joint_positivity,
    span_coefficients,
    unbiased_compatible,
    vectors_independent,
    w_vector,
)

_MAX_TRIES = 100_000


def _unit(rng) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def _gram_margin(a, b) -> float:
    """Relative Gram determinant; the squared sine of the angle."""
    gaa, gbb, gab = a @ a, b @ b, a @ b
    return float((gaa * gbb - gab * gab) / (gaa * gbb))


def _dep_points(alpha, beta, gamma, margin):
    points = []
    if alpha > margin:
        points.append((gamma / alpha, 0.0))
    if beta > margin:
        points.append((0.0, gamma / beta))
    if abs(alpha + beta - 2.0) > margin:
        v = gamma / (alpha + beta - 2.0)
        points.append((v, v))
    if abs(alpha - beta) > margin:
        points.append(((gamma - beta) / (alpha - beta),
                       (gamma - alpha) / (beta - alpha)))
    if abs(beta - 2.0) > margin:
        points.append((1.0, (alpha - gamma) / (2.0 - beta)))
    if abs(alpha - 2.0) > margin:
        points.append(((beta - gamma) / (2.0 - alpha), 1.0))
    return points


def decision_margins_ok(a_obs: BlochObservable, b_obs: BlochObservable,
                        jp: JointParams, margin: float,
                        tol: Tolerance = DEFAULT_TOL) -> bool:
    """Whether all closed-form decision quantities clear ``margin``.

    Checks interior positivity, decisively nonzero effects, distance from
    every dependence point, signed clearance of the w-product test, and a
    decisive in-span / off-span call.
    """
    pos = joint_positivity(a_obs, b_obs, jp)
    if min(pos.slacks) < margin:
        return False
    for s, v in joint_effect_parameters(a_obs, b_obs, jp):
        if max(abs(s), float(np.linalg.norm(v))) < margin:
            return False
    span = span_coefficients(jp.g, a_obs.a, b_obs.a, tol)
    norm_g = float(np.linalg.norm(jp.g))
    if not span.in_span:
        return span.residual > margin * max(norm_g, 0.1)
    if span.residual > tol.eps_rank * max(norm_g, 1e-12) * 10:
        return False  # ambiguous span membership
    for p1, p2 in _dep_points(a_obs.alpha, b_obs.alpha, jp.gamma, margin):
        if max(abs(span.c1 - p1), abs(span.c2 - p2)) < margin:
            return False
    w = w_vector(span.c1, span.c2, a_obs.alpha, b_obs.alpha, jp.gamma)
    best = max(w.w_pp * w.w_mm, w.w_pm * w.w_mp)
    return abs(best) > margin


def sample_unbiased_instance(rng, margin: float = 1e-3, span_fraction: float = 0.6,
                             tol: Tolerance = DEFAULT_TOL):
    """Random compatible unbiased instance with decisive decision quantities."""
    for _ in range(_MAX_TRIES):
        a = _unit(rng) * rng.uniform(0.15, 0.85)
        b = _unit(rng) * rng.uniform(0.15, 0.85)
        if _gram_margin(a, b) < 0.05:
            continue
        if np.linalg.norm(a - b) + np.linalg.norm(a + b) > 2.0 - 0.02:
            continue
        gamma = rng.uniform(0.1, 0.9)
        if rng.random() < span_fraction:
            c1, c2 = rng.uniform(-0.5, 1.5, size=2)
            g = c1 * a + c2 * b
        else:
            g = _unit(rng) * rng.uniform(0.0, gamma)
        a_obs, b_obs = BlochObservable(1.0, a), BlochObservable(1.0, b)
        jp = JointParams(gamma, g)
        if decision_margins_ok(a_obs, b_obs, jp, margin, tol):
            return a_obs, b_obs, jp
    raise RuntimeError("rejection sampling failed to find an unbiased instance")


def sample_biased_instance(rng, margin: float = 1e-3, span_fraction: float = 0.6,
                           tol: Tolerance = DEFAULT_TOL):
    """Random biased instance (biases in [0.6, 1.4]) with decisive quantities."""
    for _ in range(_MAX_TRIES):
        alpha = rng.uniform(0.6, 1.4)
        beta = rng.uniform(0.6, 1.4)
        a = _unit(rng) * rng.uniform(0.1, 0.5) * min(alpha, 2.0 - alpha)
        b = _unit(rng) * rng.uniform(0.1, 0.5) * min(beta, 2.0 - beta)
        if _gram_margin(a, b) < 0.05:
            continue
        lo = max(0.0, alpha + beta - 2.0) + 0.05
        hi = min(alpha, beta) - 0.05
        if lo >= hi:
            continue
        gamma = rng.uniform(lo, hi)
        if rng.random() < span_fraction:
            c1, c2 = rng.uniform(-0.3, 1.3, size=2)
            g = c1 * a + c2 * b
        else:
            g = _unit(rng) * rng.uniform(0.0, gamma)
        a_obs, b_obs = BlochObservable(alpha, a), BlochObservable(beta, b)
        jp = JointParams(gamma, g)
        if decision_margins_ok(a_obs, b_obs, jp, margin, tol):
            return a_obs, b_obs, jp
    raise RuntimeError("rejection sampling failed to find a biased instance")


def sample_dep_instance(rng, which: str | None = None, margin: float = 1e-3,
                        tol: Tolerance = DEFAULT_TOL):
    """Unbiased instance placed exactly on one of the minimal dependence lines."""
    choices = ("dep1", "dep2", "dep5", "dep6")
    for _ in range(_MAX_TRIES):
        name = which or choices[rng.integers(len(choices))]
        a = _unit(rng) * rng.uniform(0.1, 0.4)
        b = _unit(rng) * rng.uniform(0.1, 0.4)
        if _gram_margin(a, b) < 0.05:
            continue
        if not unbiased_compatible(a, b):
            continue
        gamma = rng.uniform(0.3, 0.7)
        coeffs = {
            "dep1": (gamma, 0.0),
            "dep2": (0.0, gamma),
            "dep5": (1.0, 1.0 - gamma),
            "dep6": (1.0 - gamma, 1.0),
        }[name]
        g = coeffs[0] * a + coeffs[1] * b
        a_obs, b_obs = BlochObservable(1.0, a), BlochObservable(1.0, b)
        jp = JointParams(gamma, g)
        pos = joint_positivity(a_obs, b_obs, jp)
        if min(pos.slacks) < margin:
            continue
        span = span_coefficients(g, a, b, tol)
        hits = dep_conditions(a_obs, b_obs, jp, span, tol.delta_boundary)
        if hits != frozenset({name}):
            continue
        others = [p for p in _dep_points(1.0, 1.0, gamma, margin)
                  if max(abs(p[0] - coeffs[0]), abs(p[1] - coeffs[1])) > 1e-12]
        if any(max(abs(span.c1 - p1), abs(span.c2 - p2)) < margin
               for p1, p2 in others):
            continue
        return a_obs, b_obs, jp, name
    raise RuntimeError("rejection sampling failed to find a dep-line instance")


def sample_independent_instance(rng, margin: float = 1e-3,
                                tol: Tolerance = DEFAULT_TOL):
    """Unbiased instance whose joint vector leaves the span of the marginal vectors."""
    for _ in range(_MAX_TRIES):
        a = _unit(rng) * rng.uniform(0.15, 0.6)
        b = _unit(rng) * rng.uniform(0.15, 0.6)
        if _gram_margin(a, b) < 0.05:
            continue
        if np.linalg.norm(a - b) + np.linalg.norm(a + b) > 2.0 - 0.02:
            continue
        gamma = rng.uniform(0.2, 0.8)
        normal = np.cross(a, b)
        normal /= np.linalg.norm(normal)
        g = _unit(rng) * rng.uniform(0.0, 0.9 * gamma)
        if abs(g @ normal) < 0.02:
            continue
        a_obs, b_obs = BlochObservable(1.0, a), BlochObservable(1.0, b)
        jp = JointParams(gamma, g)
        pos = joint_positivity(a_obs, b_obs, jp)
        if min(pos.slacks) < margin:
            continue
        span = span_coefficients(g, a, b, tol)
        if span.in_span or span.residual < 0.02:
            continue
        return a_obs, b_obs, jp
    raise RuntimeError("rejection sampling failed to find an off-span instance")


def random_observable(rng, dim: int, n_outcomes: int, labels=None) -> Observable:
    """Random full-rank observable: normalized Wishart blocks."""
    mats = []
    for _ in range(n_outcomes):
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        mats.append(x @ x.conj().T)
    total = np.sum(mats, axis=0)
    vals, vecs = np.linalg.eigh(total)
    inv_sqrt = vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.conj().T
    effects = tuple(inv_sqrt @ m @ inv_sqrt for m in mats)
    if labels is None:
        labels = tuple(str(i) for i in range(n_outcomes))
    return Observable(labels, effects)


def random_kernel(rng, out_labels, in_labels) -> MarkovKernel:
    """Random column-stochastic kernel with Dirichlet columns."""
    out_labels, in_labels = tuple(out_labels), tuple(in_labels)
    cols = rng.dirichlet(np.ones(len(out_labels)), size=len(in_labels))
    return MarkovKernel(out_labels, in_labels, cols.T)
