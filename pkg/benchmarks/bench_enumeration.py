"""Benchmark the subset-enumeration backends (compiled core vs pure NumPy).

Times the vertex kernel on the joint-preserving polytope of a qubit joint
observable (the dominant workload of batch cross-validation) and on a
synthetic random polytope, plus the ray kernel on a marginal cone.

Run:  python benchmarks/bench_enumeration.py
"""

import math
import time

import numpy as np

from minjoint import _enum_py
from minjoint.compare import make_instance
from minjoint.minimality import build_cone_system, build_KG_system
from minjoint.observables import DEFAULT_TOL
from minjoint.polyhedra import affine_reduce
from minjoint.qubit import BlochObservable, JointParams

try:
    from minjoint import _enum_core
except ImportError:
    _enum_core = None


def reduced_rows(system):
    red = affine_reduce(system, DEFAULT_TOL)
    w, t = red.w, red.t
    keep = np.max(np.abs(w), axis=1) > 1e-11
    return np.ascontiguousarray(w[keep]), np.ascontiguousarray(t[keep])


def time_call(fn, *args, repeat=5):
    best = math.inf
    result = None
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def bench(label, fn_name, args):
    py_time, py_out = time_call(getattr(_enum_py, fn_name), *args)
    line = f"{label:<38} {len(py_out):>5} cands  python {py_time * 1e3:8.2f} ms"
    if _enum_core is not None:
        c_time, c_out = time_call(getattr(_enum_core, fn_name), *args)
        assert len(c_out) == len(py_out), "backends disagree"
        line += f"  compiled {c_time * 1e3:8.2f} ms  speedup {py_time / c_time:5.2f}x"
    print(line)


def main():
    inst = make_instance(
        BlochObservable(1.0, [0.3, 0.0, 0.0]),
        BlochObservable(1.0, [0.0, 0.3, 0.0]),
        JointParams(0.5, [0.15, -0.03, 0.0]),
    )
    w, t = reduced_rows(build_KG_system(inst))
    print(f"K_G polytope: {w.shape[0]} rows, reduced dim {w.shape[1]}, "
          f"C({w.shape[0]},{w.shape[1]}) = {math.comb(w.shape[0], w.shape[1])}")
    bench("vertex_candidates on K_G", "vertex_candidates",
          (w, t, DEFAULT_TOL.eps_rank, DEFAULT_TOL.eps_norm))

    cone = build_cone_system(inst, 0)
    wc, _ = reduced_rows(cone)
    bench("ray_candidates on marginal cone", "ray_candidates",
          (wc, DEFAULT_TOL.eps_rank, DEFAULT_TOL.eps_norm))

    rng = np.random.default_rng(7)
    dims = 6
    rows = 12
    wr = np.ascontiguousarray(np.vstack([rng.normal(size=(rows, dims)),
                                         np.eye(dims), -np.eye(dims)]))
    tr = np.ascontiguousarray(np.concatenate([np.full(rows, -1.0),
                                              np.full(dims, -1.0),
                                              np.full(dims, -1.0)]))
    print(f"random polytope: {wr.shape[0]} rows, dim {dims}, "
          f"C({wr.shape[0]},{dims}) = {math.comb(wr.shape[0], dims)}")
    bench("vertex_candidates on random polytope", "vertex_candidates",
          (wr, tr, DEFAULT_TOL.eps_rank, DEFAULT_TOL.eps_norm))

    if _enum_core is None:
        print("compiled core not built; only the pure backend was timed")


if __name__ == "__main__":
    main()
