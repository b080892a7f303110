"""Command-line front end: JSON in, verdict/CSV out.

Exit codes: 0 when a decision was reached (NOT_MINIMAL included), 1 on
usage or input errors, 2 on numerical or enumeration-cap failures, 3 when
two decision paths disagree beyond the boundary band.
"""

from __future__ import annotations

import argparse
import io
import json
import sys

from . import serialize
from .compare import cross_validate, oracle_compare
from .errors import (
    ConsistencyError,
    EnumerationCapError,
    NumericalError,
    UnboundedSystemError,
)
from .minimality import (
    JointInstance,
    NOT_MINIMAL,
    descend_to_minimal,
    is_minimal,
)
from .observables import Tolerance, joint_from_common, pairwise_reduce
from .polyhedra import enumerate_vertices
from .qubit import qubit_is_minimal, region_scan


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _tolerance(args) -> Tolerance:
    if getattr(args, "tol", None) is not None:
        return Tolerance(delta_boundary=args.tol)
    return Tolerance()


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_check(args) -> int:
    tol = _tolerance(args)
    data = _load_json(args.input)
    joint = serialize.observable_from_json(data["joint"])
    marginals = tuple(serialize.observable_from_json(m) for m in data["marginals"])
    inst = JointInstance(marginals, joint, tol)
    verdict = is_minimal(inst)
    payload = serialize.verdict_to_json(verdict)
    if args.descend and verdict.decision == NOT_MINIMAL:
        result = descend_to_minimal(inst)
        payload["descend"] = {
            "joint": serialize.observable_to_json(result.joint),
            "status": result.status,
            "converged": result.converged,
            "iterations": len(result.history),
        }
    _emit(serialize.dumps(payload), args.out)
    return 0


def _cmd_qubit_check(args) -> int:
    tol = _tolerance(args)
    a_obs, b_obs, jp = serialize.qubit_instance_from_json(_load_json(args.input))
    if args.cross_validate:
        cv = cross_validate(a_obs, b_obs, jp, tol)
        payload = {
            "closed": serialize.verdict_to_json(cv.closed),
            "general": serialize.verdict_to_json(cv.general),
            "agree": cv.agree,
        }
        _emit(serialize.dumps(payload), args.out)
        return 3 if cv.hard_disagree else 0
    verdict = qubit_is_minimal(a_obs, b_obs, jp, tol)
    _emit(serialize.dumps(serialize.verdict_to_json(verdict)), args.out)
    return 0


def _cmd_region(args) -> int:
    tol = _tolerance(args)
    data = _load_json(args.input)
    a_obs, b_obs, jp = serialize.qubit_instance_from_json(data)
    if a_obs.alpha != 1.0 or b_obs.alpha != 1.0:
        raise UsageError("region scans require unbiased marginals (alpha = beta = 1)")
    gamma = args.gamma if args.gamma is not None else jp.gamma
    scan = region_scan(a_obs.a, b_obs.a, gamma, grid_n=args.grid, tol=tol)
    buffer = io.StringIO()
    scan.write_csv(buffer)
    _emit(buffer.getvalue(), args.out)
    return 0


def _cmd_reduce(args) -> int:
    tol = _tolerance(args)
    obs = serialize.observable_from_json(_load_json(args.input))
    reduced, forward, backward = pairwise_reduce(obs, tol)
    payload = {
        "observable": serialize.observable_to_json(reduced),
        "forward": serialize.kernel_to_json(forward),
        "backward": serialize.kernel_to_json(backward),
    }
    _emit(serialize.dumps(payload), args.out)
    return 0


def _cmd_joint(args) -> int:
    tol = _tolerance(args)
    data = _load_json(args.input)
    common = serialize.observable_from_json(data["common"])
    kernels = [serialize.kernel_from_json(k) for k in data["kernels"]]
    joint = joint_from_common(common, kernels, tol)
    _emit(serialize.dumps(serialize.observable_to_json(joint)), args.out)
    return 0


def _cmd_vertices(args) -> int:
    tol = _tolerance(args)
    sys_obj = serialize.linear_system_from_json(_load_json(args.input))
    vs = enumerate_vertices(sys_obj, tol)
    _emit(serialize.dumps(serialize.vertexset_to_json(vs)), args.out)
    return 0


def _cmd_oracle_compare(args) -> int:
    tol = _tolerance(args)
    report = oracle_compare(args.seed, args.count, tol)
    _emit(serialize.dumps(report), args.out)
    return 3 if report["disagreements"] else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minjoint",
                     description="Joint-observable minimality toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, needs_input=True):
        if needs_input:
            p.add_argument("--input", required=True, help="input JSON path")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--tol", type=float,
                       help="override the boundary tolerance delta")

    p = sub.add_parser("check", help="decide minimality of a joint observable")
    common(p)
    p.add_argument("--descend", action="store_true",
                   help="after NOT_MINIMAL, descend to a minimal joint observable")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("qubit-check", help="closed-form qubit decision")
    common(p)
    p.add_argument("--cross-validate", action="store_true",
                   help="also run the general algorithm and compare")
    p.set_defaults(func=_cmd_qubit_check)

    p = sub.add_parser("region", help="CSV scan of the coefficient plane")
    common(p)
    p.add_argument("--gamma", type=float, help="override gamma from the input file")
    p.add_argument("--grid", type=int, default=201, help="grid points per axis")
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("reduce", help="pairwise linearly independent representative")
    common(p)
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("joint", help="joint observable from a common refinement")
    common(p)
    p.set_defaults(func=_cmd_joint)

    p = sub.add_parser("vertices", help="vertex enumeration of a linear system")
    common(p)
    p.set_defaults(func=_cmd_vertices)

    p = sub.add_parser("oracle-compare",
                       help="batch agreement of closed-form and general paths")
    common(p, needs_input=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=_cmd_oracle_compare)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (EnumerationCapError, UnboundedSystemError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except ConsistencyError as exc:
        print(f"consistency error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
