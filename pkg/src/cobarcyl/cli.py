"""Command-line surface for batch verification and transport.

Exit codes: 0 success, 1 mathematical-check failure, 2 input error.
Cooperads are given either as JSON files or as builtin addresses like
"cocom:4".  All output is deterministic byte for byte.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import serialize
from .cobar import COBAR, CYL
from .cooperads import BUILTINS, CooperadSpec, builtin, validate
from .convolution import (
    BracketData,
    ConvElement,
    OperadTarget,
    mc_check,
    operad_map_to_mc,
)
from .cylinder import CylContext
from .derivations import Derivation, der_diff, is_closed, lift_derivation
from .homology import assemble, ranks
from .linalg import frac
from .transport import transport_pipeline, validate_structure

EXIT_OK = 0
EXIT_MATH = 1
EXIT_INPUT = 2


def _load_cooperad(path_or_name: str) -> CooperadSpec:
    name = path_or_name.split(":", 1)[0]
    if name in BUILTINS:
        return builtin(path_or_name)
    try:
        with open(path_or_name) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read cooperad {path_or_name!r}: {e}")
    try:
        return serialize.cooperad_from_json(data)
    except (KeyError, ValueError) as e:
        raise InputError(f"malformed cooperad JSON: {e}")


class InputError(Exception):
    pass


def _emit(args, payload: dict, text_lines: list[str]):
    if args.format == "json":
        out = serialize.dumps(payload)
    else:
        out = "\n".join(text_lines)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(out + "\n")
    else:
        print(out)


def cmd_validate(args) -> int:
    spec = _load_cooperad(args.cooperad)
    cap = min(args.cap, spec.arity_cap) if args.cap else spec.arity_cap
    rep = validate(spec)
    lines = [rep.summary()]
    ok = rep.ok
    cyl = CylContext(spec)
    for n in range(2, cap + 1):
        fails = cyl.cobar.d_squared_check(n)
        ok &= not fails
        lines.append(f"[{'ok' if not fails else 'FAIL'}] cobar d^2 = 0 at arity {n}")
        cfails = cyl.d_squared_check(n)
        ok &= not cfails
        lines.append(f"[{'ok' if not cfails else 'FAIL'}] cylinder d^2 = 0 at arity {n}")
        c0fails = cyl.d_squared_check(n, weight0=True)
        ok &= not c0fails
        lines.append(f"[{'ok' if not c0fails else 'FAIL'}] cylinder d0^2 = 0 at arity {n}")
    payload = {
        "cooperad": spec.name,
        "ok": ok,
        "checks": [
            {"name": name, "ok": okc, "detail": detail} for name, okc, detail in rep.checks
        ],
    }
    _emit(args, payload, lines)
    return EXIT_OK if ok else EXIT_MATH


def cmd_cohomology(args) -> int:
    spec = _load_cooperad(args.cooperad)
    n = args.arity
    if n < 0 or n > spec.arity_cap:
        raise InputError(f"arity {n} outside 0..{spec.arity_cap}")
    cyl = CylContext(spec)
    rows = []
    lines = []
    for which in ("cobar", "cyl_beta"):
        for dmode in ("weight0", "full"):
            sl = assemble(cyl, n, which, dmode)
            for deg, rk in sorted(ranks(sl).items()):
                rows.append(
                    {"component": which, "differential": dmode, "arity": n, "degree": deg, "rank": rk}
                )
                lines.append(f"{which:8s} {dmode:8s} arity {n} degree {deg:3d} rank {rk}")
    _emit(args, {"table": rows}, lines)
    return EXIT_OK


def cmd_lift(args) -> int:
    spec = _load_cooperad(args.cooperad)
    cyl = CylContext(spec)
    try:
        with open(args.derivation) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read derivation: {e}")
    if data.get("flavor") != COBAR:
        raise InputError("lift expects a single-colored derivation")
    D = serialize.derivation_from_json(data, cyl.cobar)
    if D.degree != 0 or not D.in_der_prime():
        raise InputError("lift needs a degree-0 weight-raising derivation")
    if not is_closed(D):
        raise InputError("lift needs a closed derivation")
    d_tilde, t_alpha, t_beta = lift_derivation(D, cyl)
    payload = {
        "lift": serialize.derivation_to_json(d_tilde),
        "corrector_alpha": serialize.derivation_to_json(t_alpha),
        "corrector_beta": serialize.derivation_to_json(t_beta),
        "verified": True,
    }
    _emit(args, payload, ["lift verified exactly (closedness + both witnesses)"])
    return EXIT_OK


def cmd_transport(args) -> int:
    spec = _load_cooperad(args.cooperad)
    cyl = CylContext(spec)
    try:
        with open(args.triple) as fh:
            triple_data = json.load(fh)
        with open(args.derivation) as fh:
            der_data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read input: {e}")
    FV, FW, U = serialize.triple_from_json(triple_data, spec)
    for name, F in (("source", FV), ("target", FW)):
        rep = validate_structure(F, cyl.cobar)
        if not rep.ok:
            print(f"invalid {name} structure: chain failures {rep.chain_failures}", file=sys.stderr)
            return EXIT_MATH
    D = serialize.derivation_from_json(der_data, cyl.cobar)
    FV2, FW2, U2, witnesses, cert = transport_pipeline(FV, FW, U, D, cyl)
    d_tilde, t_alpha, t_beta = witnesses
    payload = {
        "triple": serialize.triple_to_json(FV2, FW2, U2),
        "certificate": {
            "checks": {k: bool(v) for k, v in cert.checks.items()},
            "lift": serialize.derivation_to_json(d_tilde),
            "corrector_alpha": serialize.derivation_to_json(t_alpha),
            "corrector_beta": serialize.derivation_to_json(t_beta),
        },
    }
    _emit(args, payload, [cert.summary()])
    return EXIT_OK if cert.ok else EXIT_MATH


def cmd_mc_check(args) -> int:
    spec = _load_cooperad(args.cooperad)
    try:
        with open(args.element) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read element: {e}")
    flavor = data.get("flavor", CYL)
    dataset = BracketData(spec, flavor)
    target = OperadTarget(dataset.ctx, flavor)
    alpha = ConvElement(spec, flavor, target, 1)
    from .serialize import _PROFILE_CODES, element_from_json

    for v in data["values"]:
        key = (_PROFILE_CODES[v["color_profile"]], v["arity"], v["generator_label"])
        alpha.values[key] = element_from_json(v["value"])
    rep = mc_check(dataset, alpha)
    payload = {"ok": rep.ok, "failures": [list(map(str, f)) for f in rep.failures]}
    lines = ["MC check: " + ("pass" if rep.ok else f"fail at {rep.failures}")]
    _emit(args, payload, lines)
    return EXIT_OK if rep.ok else EXIT_MATH


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cobarcyl",
        description="exact cobar / cylinder operad calculus over the rationals",
    )
    parser.add_argument("--format", choices=["json", "text"], default="text")
    parser.add_argument("--out", help="write output to a file instead of stdout")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="cooperad axioms and d^2 = 0 checks")
    p.add_argument("cooperad")
    p.add_argument("--cap", type=int, default=None)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("cohomology", help="exact cohomology rank tables")
    p.add_argument("cooperad")
    p.add_argument("arity", type=int)
    p.set_defaults(fn=cmd_cohomology)

    p = sub.add_parser("lift", help="lift a derivation to the cylinder operad")
    p.add_argument("cooperad")
    p.add_argument("derivation")
    p.set_defaults(fn=cmd_lift)

    p = sub.add_parser("transport", help="transport a triple along a derivation")
    p.add_argument("cooperad")
    p.add_argument("triple")
    p.add_argument("derivation")
    p.set_defaults(fn=cmd_transport)

    p = sub.add_parser("mc-check", help="Maurer-Cartan equation check")
    p.add_argument("cooperad")
    p.add_argument("element")
    p.set_defaults(fn=cmd_mc_check)

    args = parser.parse_args(argv)
    random.seed(args.seed)
    try:
        return args.fn(args)
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
