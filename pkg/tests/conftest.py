"""Shared fixtures: qubit instances, the discrimination setup, small helpers."""

import numpy as np
import pytest

from minjoint.minimality import JointInstance
from minjoint.observables import MarkovKernel, Observable
from minjoint.qubit import BlochObservable, JointParams, bloch_effect


def qubit_pair():
    return (BlochObservable(1.0, [0.3, 0.0, 0.0]),
            BlochObservable(1.0, [0.0, 0.3, 0.0]))


@pytest.fixture
def f1_min():
    a_obs, b_obs = qubit_pair()
    return a_obs, b_obs, JointParams(0.5, [0.15, 0.15, 0.0])


@pytest.fixture
def f1_nonmin():
    a_obs, b_obs = qubit_pair()
    return a_obs, b_obs, JointParams(0.5, [0.15, -0.03, 0.0])


@pytest.fixture
def f1_indep():
    a_obs, b_obs = qubit_pair()
    return a_obs, b_obs, JointParams(0.5, [0.1, 0.1, 0.1])


JOINT_OUTCOMES = (("+", "+"), ("+", "-"), ("-", "+"), ("-", "-"))


def example_trivial_instance(t_matrix=None):
    """The nontrivial joint of two-outcome trivial marginals: effects T/2, (I-T)/2."""
    eye = np.eye(2, dtype=complex)
    t = bloch_effect(1.0, [0, 0, 0.5]) if t_matrix is None else t_matrix
    trivial = Observable(("+", "-"), (0.5 * eye, 0.5 * eye))
    joint = Observable(JOINT_OUTCOMES,
                       (0.5 * t, 0.5 * (eye - t), 0.5 * (eye - t), 0.5 * t))
    return JointInstance((trivial, trivial), joint)


def discrimination_fixture():
    """Rank-1 basis measurement in d = 4 and its two 2-outcome groupings."""
    projectors = []
    for x in range(4):
        p = np.zeros((4, 4), dtype=complex)
        p[x, x] = 1.0
        projectors.append(p)
    parent = Observable(("1", "2", "3", "4"), tuple(projectors))
    grouped = Observable(("1", "2"), (projectors[0] + projectors[2],
                                      projectors[1] + projectors[3]))
    grouped_alt = Observable(("1", "2"), (projectors[0] + projectors[3],
                                          projectors[1] + projectors[2]))
    grouping = MarkovKernel(("1", "2"), ("1", "2", "3", "4"),
                            [[1, 0, 1, 0], [0, 1, 0, 1]])
    return parent, grouped, grouped_alt, grouping


def random_discriminating(rng):
    """Two-outcome observable with C(1) >= P1 and C(2) >= P2 on the 4-dim fixture."""
    projectors = [np.zeros((4, 4), dtype=complex) for _ in range(4)]
    for x in range(4):
        projectors[x][x, x] = 1.0
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    m = x @ x.conj().T
    m = m / (np.linalg.eigvalsh(m)[-1] * (1.0 + rng.uniform(0.1, 1.0)))
    rest = np.zeros((4, 4), dtype=complex)
    rest[2:, 2:] = m
    block = projectors[2] + projectors[3]
    return Observable(("1", "2"), (projectors[0] + rest,
                                   projectors[1] + (block - rest)))
