"""JSON and CSV wire formats.

Observables carry complex matrices as nested [re, im] pairs; product
outcome labels are encoded as arrays of labels.  All emitted JSON uses
sorted keys and Python's shortest round-trip float repr, so identical
inputs give byte-identical output.
"""

from __future__ import annotations

import json

import numpy as np

from .minimality import Certificate, MinimalityVerdict
from .observables import MarkovKernel, Observable
from .polyhedra import LinearSystem, VertexSet
from .qubit import BlochObservable, JointParams


def _label_to_json(label):
    if isinstance(label, tuple):
        return [_label_to_json(x) for x in label]
    return label


def _label_from_json(obj):
    if isinstance(obj, list):
        return tuple(_label_from_json(x) for x in obj)
    return obj


def _matrix_to_json(m: np.ndarray):
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows],
                    dtype=np.complex128)


def observable_to_json(obs: Observable) -> dict:
    return {
        "dim": obs.dim,
        "outcomes": [_label_to_json(x) for x in obs.outcomes],
        "effects": [_matrix_to_json(e.entries) for e in obs.effects],
    }


def observable_from_json(data: dict) -> Observable:
    outcomes = tuple(_label_from_json(x) for x in data["outcomes"])
    effects = tuple(_matrix_from_json(e) for e in data["effects"])
    obs = Observable(outcomes, effects)
    if obs.dim != data["dim"]:
        raise ValueError(f"declared dim {data['dim']} != matrix dim {obs.dim}")
    return obs


def kernel_to_json(kernel: MarkovKernel) -> dict:
    return {
        "out": [_label_to_json(x) for x in kernel.out_set],
        "in": [_label_to_json(x) for x in kernel.in_set],
        "entries": [[float(v) for v in row] for row in kernel.entries],
    }


def kernel_from_json(data: dict) -> MarkovKernel:
    return MarkovKernel(
        tuple(_label_from_json(x) for x in data["out"]),
        tuple(_label_from_json(x) for x in data["in"]),
        np.array(data["entries"], dtype=float),
    )


def linear_system_to_json(sys: LinearSystem) -> dict:
    def rows(a, b):
        return [[float(v) for v in row] + [float(rhs)] for row, rhs in zip(a, b)]

    return {"n": sys.n, "eq": rows(sys.a_eq, sys.b_eq), "ineq": rows(sys.a_ge, sys.b_ge)}


def linear_system_from_json(data: dict) -> LinearSystem:
    n = int(data["n"])

    def split(rows):
        return ([(row[:-1], row[-1]) for row in rows])

    return LinearSystem.from_rows(n, split(data.get("eq", [])),
                                  split(data.get("ineq", [])))


def vertexset_to_json(vs: VertexSet) -> dict:
    return {
        "vertices": [[float(v) for v in row] for row in vs.vertices],
        "dedup_tol": vs.dedup_tol,
    }


def qubit_instance_to_json(a_obs: BlochObservable, b_obs: BlochObservable,
                           jp: JointParams) -> dict:
    return {
        "alpha": a_obs.alpha, "a": [float(v) for v in a_obs.a],
        "beta": b_obs.alpha, "b": [float(v) for v in b_obs.a],
        "gamma": jp.gamma, "g": [float(v) for v in jp.g],
    }


def qubit_instance_from_json(data: dict):
    return (
        BlochObservable(float(data["alpha"]), np.array(data["a"], dtype=float)),
        BlochObservable(float(data["beta"]), np.array(data["b"], dtype=float)),
        JointParams(float(data["gamma"]), np.array(data["g"], dtype=float)),
    )


def _jsonify(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_jsonify(v) for v in value]
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    return value


def certificate_to_json(cert: Certificate) -> dict:
    return {
        "kernel": kernel_to_json(cert.kernel),
        "triple": [_label_to_json(x) for x in cert.triple],
    }


def verdict_to_json(verdict: MinimalityVerdict) -> dict:
    return {
        "decision": verdict.decision,
        "method": verdict.method,
        "certificate": (certificate_to_json(verdict.certificate)
                        if verdict.certificate else None),
        "trace": _jsonify(verdict.trace),
        "maximal": verdict.maximal,
    }


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
