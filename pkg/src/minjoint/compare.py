"""Cross-validation of the closed-form qubit decision against the general path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError
from .minimality import BOUNDARY, JointInstance, MinimalityVerdict, is_minimal
from .observables import DEFAULT_TOL, Tolerance
from .polyhedra import Caps, DEFAULT_CAPS
from .qubit import (
    BlochObservable,
    JointParams,
    bloch_to_observable,
    joint_from_params,
    qubit_is_minimal,
)
from .sampling import sample_unbiased_instance


def make_instance(a_obs: BlochObservable, b_obs: BlochObservable, jp: JointParams,
                  tol: Tolerance = DEFAULT_TOL) -> JointInstance:
    """Assemble the JointInstance of a parametrized qubit joint observable."""
    return JointInstance(
        (bloch_to_observable(a_obs), bloch_to_observable(b_obs)),
        joint_from_params(a_obs, b_obs, jp, tol),
        tol,
    )


@dataclass(frozen=True)
class CrossValidation:
    closed: MinimalityVerdict
    general: MinimalityVerdict

    @property
    def agree(self) -> bool:
        return self.closed.decision == self.general.decision

    @property
    def hard_disagree(self) -> bool:
        """Disagreement beyond the boundary band."""
        return (not self.agree
                and BOUNDARY not in (self.closed.decision, self.general.decision))


def cross_validate(a_obs: BlochObservable, b_obs: BlochObservable, jp: JointParams,
                   tol: Tolerance = DEFAULT_TOL,
                   caps: Caps = DEFAULT_CAPS) -> CrossValidation:
    closed = qubit_is_minimal(a_obs, b_obs, jp, tol)
    general = is_minimal(make_instance(a_obs, b_obs, jp, tol), caps)
    return CrossValidation(closed, general)


def oracle_compare(seed: int, count: int, tol: Tolerance = DEFAULT_TOL,
                   caps: Caps = DEFAULT_CAPS) -> dict:
    """Agreement report over seeded random compatible unbiased instances.

    Disagreeing instances are dumped in full for triage.
    """
    rng = np.random.default_rng(seed)
    agreements = 0
    disagreements = []
    for index in range(count):
        a_obs, b_obs, jp = sample_unbiased_instance(rng, tol=tol)
        cv = cross_validate(a_obs, b_obs, jp, tol, caps)
        if cv.agree:
            agreements += 1
        else:
            disagreements.append({
                "index": index,
                "alpha": a_obs.alpha, "a": list(a_obs.a),
                "beta": b_obs.alpha, "b": list(b_obs.a),
                "gamma": jp.gamma, "g": list(jp.g),
                "closed": cv.closed.decision,
                "general": cv.general.decision,
            })
    return {
        "seed": seed,
        "count": count,
        "agreements": agreements,
        "disagreements": disagreements,
    }


def require_agreement(cv: CrossValidation):
    """Raise when the two decision paths disagree beyond the boundary band."""
    if cv.hard_disagree:
        raise ConsistencyError(
            f"closed form says {cv.closed.decision}, "
            f"general algorithm says {cv.general.decision}")
