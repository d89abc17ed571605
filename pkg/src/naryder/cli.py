"""Command-line entry point.

Every command prints one JSON object ``{"command", "status", "payload",
"seeds"}`` on stdout.  Exit codes: 0 PASS/feasible, 1 FAIL/infeasible,
2 usage or format error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .exact_linalg import ContractViolation, Matrix
from .formats import (
    FormatError,
    algebra_to_json,
    load_algebra,
    matrix_from_json,
    read_json,
    vector_from_json,
    vectors_from_json,
)
from .nary_core import (
    antisymmetric_space,
    check_anticommutativity,
    check_filippov,
    default_probes,
    derivation_space,
    locder_upper_bound,
    multi_point_witness,
)
from .sampling import random_vector, rng_for

EXIT = {"PASS": 0, "FAIL": 1, "INFEASIBLE": 1, "ERROR": 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_seed() -> int:
    raw = os.environ.get("NARYDER_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"NARYDER_SEED must be an integer, got {raw!r}")


def _result(command, status, payload, seeds=None) -> dict:
    return {"command": command, "status": status, "payload": payload, "seeds": seeds or {}}


def _identify(A):
    """"M8", "A:<m>" or None, by structure rather than by how A was loaded."""
    from .filippov import build_filippov
    from .malcev import build_m8
    if A == build_m8():
        return "M8"
    if A.dim >= 4 and A.arity == A.dim - 1 and A == build_filippov(A.dim):
        return f"A:{A.dim}"
    return None


def _is_m8(A) -> bool:
    return _identify(A) == "M8"


def _is_filippov(A) -> bool:
    return (_identify(A) or "").startswith("A:")


# -- commands ------------------------------------------------------------------

def cmd_build(args):
    A = load_algebra(args.algebra)
    return _result("build", "PASS", algebra_to_json(A))


def cmd_check(args):
    A = load_algebra(args.algebra)
    seeds = {}
    if args.kind == "filippov":
        report = check_filippov(A)
        payload = report.to_json()
        ok = report.ok
    else:
        reports = [check_anticommutativity(A)]
        payload = {"anticommutativity": reports[0].to_json()}
        ok = reports[0].ok
        if _is_m8(A):
            from .octonion import Octonion, check_octonion_identities, ternary_bracket

            def octonion_eval(idx):
                return ternary_bracket(*(Octonion.basis(i) for i in idx)).coords

            direct = check_anticommutativity(A, octonion_eval)
            seed = args.seed if args.seed is not None else _default_seed()
            seeds["identities"] = seed
            octo = check_octonion_identities(seed=seed, trials=args.trials)
            payload["octonion_bracket_anticommutativity"] = direct.to_json()
            payload["octonion_identities"] = octo
            ok = ok and direct.ok and octo["ok"]
    return _result("check", "PASS" if ok else "FAIL", payload, seeds)


def cmd_der(args):
    A = load_algebra(args.algebra)
    der = derivation_space(A)
    payload = {
        "dim": der.dim,
        "antisymmetric": all(B.is_antisymmetric() for B in der.basis_maps),
        "basis": [B.to_json() for B in der.basis_maps],
    }
    status = "PASS"
    if _is_m8(A):
        from .malcev import m8_basis_check
        check = m8_basis_check()
        payload["listed_basis_check"] = check
        status = "PASS" if check["ok"] else "FAIL"
    elif _is_filippov(A):
        from .filippov import verify_der_characterization
        check = verify_der_characterization(A.dim)
        payload["characterization"] = check
        status = "PASS" if check["ok"] else "FAIL"
    return _result("der", status, payload)


def cmd_params(args):
    from .malcev import M8DerivationParams, M8ParamError, params_roundtrip, params_to_matrix
    data = read_json(args.file)
    try:
        if isinstance(data, dict):
            p = M8DerivationParams.from_json(data)
            M = params_to_matrix(p)
            return _result("params", "PASS", {"params": p.to_json(), "matrix": M.to_json()})
        M = matrix_from_json(data, 8, "matrix")
        p = params_roundtrip(M)
    except M8ParamError as exc:
        return _result("params", "FAIL", {"error": str(exc)})
    return _result("params", "PASS", {"params": p.to_json(), "matrix": M.to_json()})


def cmd_locder_bound(args):
    A = load_algebra(args.algebra)
    d = A.dim
    seeds = {}
    if args.probes == "default":
        probes = [p.vector for p in default_probes(d)]
    else:
        probes = vectors_from_json(read_json(args.probes), d, "probes")
    if args.random_probes:
        seed = args.seed if args.seed is not None else _default_seed()
        seeds["random_probes"] = seed
        rng = rng_for(seed, "locder-bound")
        probes += [random_vector(rng, d) for _ in range(args.random_probes)]
    if not probes:
        raise FormatError("probes: at least one probe is required")
    der = derivation_space(A)
    bound = locder_upper_bound(A, probes, der)
    payload = {
        "dim": bound.dim,
        "der_dim": der.dim,
        "quotient_dim": bound.dim - der.dim,
        "antisymmetric": bound == antisymmetric_space(d),
        "probe_count": len(probes),
    }
    if args.basis:
        payload["basis"] = [Matrix(d, d, v).to_json() for v in bound.vectors]
    return _result("locder-bound", "PASS", payload, seeds)


def cmd_witness(args):
    A = load_algebra(args.algebra)
    d = A.dim
    M = matrix_from_json(read_json(args.map), d, "map")
    points = vectors_from_json(read_json(args.points), d, "points")
    der = derivation_space(A)
    trace = multi_point_witness(der, [(x, M.apply(x)) for x in points])
    if trace is None:
        return _result("witness", "INFEASIBLE", {"feasible": False, "points": len(points)})
    return _result("witness", "PASS", {"feasible": True, "trace": trace.to_json()})


def cmd_local_cert(args):
    from .filippov import local_certificate
    A = load_algebra(args.algebra)
    if not _is_filippov(A):
        raise FormatError("local-cert takes a built-in Filippov algebra A:<m>")
    M = matrix_from_json(read_json(args.map), A.dim, "map")
    cert = local_certificate(A.dim, M)
    status = "PASS" if cert.status == "DERIVATION" else "FAIL"
    return _result("local-cert", status, cert.to_json())


def cmd_m8_witness(args):
    from .malcev import constructive_local_witness, m8_derivations
    from .octonion import OctonionDomainError
    M = matrix_from_json(read_json(args.map), 8, "map")
    x = vector_from_json(read_json(args.point), 8, "point")
    try:
        _, trace = constructive_local_witness(M, x, mode=args.mode, tol=args.tol,
                                              search_cap=args.search_cap)
    except OctonionDomainError as exc:
        return _result("m8-witness", "ERROR",
                       {"error": type(exc).__name__, "message": str(exc)})
    oracle = multi_point_witness(m8_derivations(), [(x, M.apply(x))])
    payload = trace.to_json()
    payload["oracle_feasible"] = oracle is not None
    return _result("m8-witness", "PASS", payload)


def cmd_explore(args):
    from .malcev import explore_2local
    seed = args.seed if args.seed is not None else _default_seed()
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    report = explore_2local(args.trials, seed)
    return _result("explore-2local", "PASS", report, {"master": seed})


def cmd_frame(args):
    from .octonion import OctonionDomainError, automorphism_from_frame, frame_from_pair
    x = vector_from_json(read_json(args.x), 8, "x")
    y = vector_from_json(read_json(args.y), 8, "y")
    try:
        frame = frame_from_pair(x, y, mode=args.mode, tol=args.tol, search_cap=args.search_cap)
    except OctonionDomainError as exc:
        return _result("frame", "ERROR", {"error": type(exc).__name__, "message": str(exc)})
    phi = automorphism_from_frame(frame)
    payload = frame.to_json()
    payload["automorphism"] = phi.to_json() if isinstance(phi, Matrix) else phi.tolist()
    return _result("frame", "PASS", payload)


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand from resetting a --pretty given before it
    common = _Parser(add_help=False)
    common.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS,
                        help="human-readable summary instead of JSON")

    parser = _Parser(prog="naryder", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build", parents=[common], help="emit algebra JSON")
    p.add_argument("algebra")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("check", parents=[common], help="identity checks")
    p.add_argument("kind", choices=["identities", "filippov"])
    p.add_argument("algebra")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("der", parents=[common], help="derivation algebra")
    p.add_argument("algebra")
    p.set_defaults(func=cmd_der)

    p = sub.add_parser("params", parents=[common], help="M8 alpha/gamma round trip")
    p.add_argument("file")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("locder-bound", parents=[common], help="upper bound for local derivations")
    p.add_argument("algebra")
    p.add_argument("--probes", default="default")
    p.add_argument("--random-probes", type=int, default=0)
    p.add_argument("--seed", type=int)
    p.add_argument("--basis", action="store_true")
    p.set_defaults(func=cmd_locder_bound)

    p = sub.add_parser("witness", parents=[common], help="multi-point derivation witness")
    p.add_argument("algebra")
    p.add_argument("--map", required=True)
    p.add_argument("--points", required=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("local-cert", parents=[common], help="probe certificate on A_m")
    p.add_argument("algebra")
    p.add_argument("--map", required=True)
    p.set_defaults(func=cmd_local_cert)

    p = sub.add_parser("m8-witness", parents=[common], help="constructive local witness on M8")
    p.add_argument("--map", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--mode", choices=["exact", "approx"], default="exact")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--search-cap", type=int, default=6)
    p.set_defaults(func=cmd_m8_witness)

    p = sub.add_parser("explore-2local", parents=[common], help="2-local exploration on M8")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("frame", parents=[common], help="octonion frame and automorphism")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--mode", choices=["exact", "approx"], default="exact")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--search-cap", type=int, default=6)
    p.set_defaults(func=cmd_frame)
    return parser


def _summary(result: dict) -> str:
    payload = result["payload"]
    lines = [f"{result['command']}: {result['status']}"]
    if isinstance(payload, dict):
        for key, val in payload.items():
            if isinstance(val, (int, float, str, bool)) or val is None:
                lines.append(f"  {key}: {val}")
    return "\n".join(lines)


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    pretty = False
    try:
        args = build_parser().parse_args(argv)
        pretty = getattr(args, "pretty", False)
        result = args.func(args)
    except UsageError as exc:
        result = _result(None, "ERROR", {"error": "usage", "message": str(exc)})
    except (FormatError, ContractViolation) as exc:
        result = _result(getattr(exc, "command", None), "ERROR",
                         {"error": type(exc).__name__, "message": str(exc)})
    if pretty:
        print(_summary(result), file=out)
    else:
        print(json.dumps(result, sort_keys=True), file=out)
    return EXIT[result["status"]]


def main():
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 1
    sys.exit(code)


if __name__ == "__main__":
    main()
