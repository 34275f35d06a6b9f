"""Command line front end.

Every command reads JSON (a file path, or ``-`` for stdin) and writes
JSON to stdout or ``--out``.  Exit status: 0 on success, 2 when the
answer is negative (violations, Differs, a failed check), 1 on usage
or input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from . import assembly as asm
from .fatgraph import FatGraph, family_Xn, two_holed_torus_example, validate_admissible
from .model_block import DEFAULT_LAMBDA, HALF_PI, BlockField, BlockPoint
from .numerics import (DEFAULT_DT, DEFAULT_T_MAX, AsymptoticToOrbit, ExitFace,
                       FiberPreservingGluing, GridSpec, cone_expansion, integrate_orbit,
                       verify_block_properties)
from .seifert_piece import build_piece

OK, USAGE, NEGATIVE = 0, 1, 2

SCHEMA_HELP = """\
input schemas (all carry "schema_version": 1):
  fatgraph: {"vertices": [[dart, ...], ...], "edges": [[d, d'], ...],
             "markings": ["regular"|"cone"|"reflector_end", ...], "roles": [...]}
  flow:     {"pieces": [{"fatgraph": ..., "block_sign": 1, "lambda": 10.0}, ...],
             "gluings": [{"from": [piece, torus], "to": [piece, torus],
                          "matrix": [[a, b], [c, d]]}, ...]}
  batch:    {"fatgraphs": [fatgraph, ...]}  (build: cyclic construction)
"""

EXAMPLES = ("two-holed-torus", "two-holed-torus-flow", "xn", "construction")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n{SCHEMA_HELP}")
        raise SystemExit(USAGE)


def _read(path: str) -> dict:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {path}: {exc}") from exc


def _emit(args, payload, text: str | None = None) -> None:
    out = text if text is not None else json.dumps(payload, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _flow(path: str) -> asm.GluedFlow:
    data = _read(path)
    if "pieces" not in data:
        raise UsageError(f"{path} is not a flow")
    return asm.GluedFlow.from_dict(data)


def _override_lambda(f: asm.GluedFlow, lam: float | None) -> asm.GluedFlow:
    if lam is None:
        return f
    pieces = [build_piece(p.graph, p.block_sign, lam) for p in f.pieces]
    return asm.build_flow(pieces, f.gluings, f.seed)


def _matrix(text: str) -> asm.Matrix:
    try:
        a, b, c, d = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError("--matrix takes four integers a,b,c,d") from exc
    return ((a, b), (c, d))


def _lam(args) -> float:
    return DEFAULT_LAMBDA if args.lam is None else args.lam


# --- commands -------------------------------------------------------------


def cmd_validate(args) -> int:
    data = _read(args.input)
    if "pieces" in data:
        try:
            asm.GluedFlow.from_dict(data)
        except (asm.InvalidGluing, ValueError) as exc:
            violations = [str(v) for v in getattr(exc, "violations", [exc])]
            _emit(args, {"kind": "flow", "valid": False, "violations": violations})
            return NEGATIVE
        _emit(args, {"kind": "flow", "valid": True, "violations": []})
        return OK
    try:
        g = FatGraph.from_dict(data)
    except ValueError as exc:
        _emit(args, {"kind": "fatgraph", "valid": False, "violations": [str(exc)]})
        return NEGATIVE
    violations = validate_admissible(g)
    _emit(args, {"kind": "fatgraph", "valid": not violations,
                 "violations": [str(v) for v in violations]})
    return NEGATIVE if violations else OK


def cmd_build(args) -> int:
    data = _read(args.input)
    lam = _lam(args)
    if "fatgraphs" in data:
        graphs = [FatGraph.from_dict(g) for g in data["fatgraphs"]]
        _emit(args, asm.construction_7_3(graphs, seed=args.seed, lam=lam).to_dict())
    elif "pieces" in data:
        _emit(args, _override_lambda(asm.GluedFlow.from_dict(data), args.lam).to_dict())
    else:
        _emit(args, build_piece(FatGraph.from_dict(data), 1, lam).to_dict())
    return OK


def cmd_flip(args) -> int:
    f = _flow(args.input)
    if args.piece is None:
        raise UsageError("flip needs --piece")
    _emit(args, asm.apply_flip(f, args.piece).to_dict())
    return OK


def cmd_compare(args) -> int:
    f1, f2 = _flow(args.inputs[0]), _flow(args.inputs[1])
    res = asm.free_homotopy_compare(f1, f2, args.max_len)
    _emit(args, res.to_dict())
    return OK if res.equal else NEGATIVE


def cmd_classify(args) -> int:
    flows = [_flow(p) for p in args.inputs]
    classes = asm.classify(flows, args.max_len)
    _emit(args, {"classes": classes, "count": len(classes)})
    return OK


def cmd_search_equiv(args) -> int:
    f1, f2 = _flow(args.inputs[0]), _flow(args.inputs[1])
    cert = asm.orbit_equivalence_search(f1, f2)
    if cert is None:
        _emit(args, {"result": "Exhausted"})
    else:
        _emit(args, {"result": "Found", "certificate": cert.to_dict(),
                     "valid": asm.certificate_valid(f1, f2, cert)})
    if args.expect == "found" and cert is None:
        return NEGATIVE
    if args.expect == "exhausted" and cert is not None:
        return NEGATIVE
    return OK


def cmd_transitive(args) -> int:
    ok = asm.check_transitive(_flow(args.input))
    _emit(args, {"transitive": ok})
    return OK if ok else NEGATIVE


def cmd_itineraries(args) -> int:
    its = sorted(asm.periodic_itineraries(_flow(args.input), args.max_len),
                 key=lambda c: (len(c), c))
    _emit(args, {"max_len": args.max_len, "count": len(its),
                 "itineraries": [[[s.piece, s.edge, s.gluing] for s in c] for c in its]})
    return OK


def cmd_integrate(args) -> int:
    b = BlockField(args.sign, _lam(args))
    y = -HALF_PI if args.y is None else args.y
    traj = integrate_orbit(b, BlockPoint(args.x, y, args.z), args.dt, args.t_max,
                           stride=args.stride)
    if args.format == "csv":
        _emit(args, None, traj.to_csv())
        return OK
    term = traj.termination
    payload = {"schema_version": 1, "lambda": b.lam, "sign": b.sign,
               "start": [args.x, y, args.z], "samples": len(traj.samples)}
    if isinstance(term, ExitFace):
        payload.update(termination="ExitFace", face=term.face.value, time=term.time,
                       exit=[term.point.x, term.point.y, term.point.z],
                       delta_z=traj.delta_z)
    elif isinstance(term, AsymptoticToOrbit):
        payload.update(termination="AsymptoticToOrbit", orbit=term.orbit)
    else:
        payload.update(termination="Budget", time=term.time)
    _emit(args, payload)
    return OK


def cmd_cone_check(args) -> int:
    A = _matrix(args.matrix or "0,1,1,0")
    try:
        rep = cone_expansion(_lam(args), A, GridSpec.parse(args.grid), args.halfwidth,
                             args.sign, args.threshold, args.dt)
    except FiberPreservingGluing as exc:
        _emit(args, {"error": exc.kind, "matrix": [list(r) for r in A]})
        return NEGATIVE
    if args.format == "csv":
        _emit(args, None, rep.to_csv())
    else:
        _emit(args, rep.to_dict())
    return OK if rep.verdict else NEGATIVE


def cmd_verify_block(args) -> int:
    grid = int(args.grid) if args.grid else 50
    reports = []
    signs = (args.sign,) if args.sign_given else (1, -1)
    for s in signs:
        reports.append(verify_block_properties(BlockField(s, _lam(args)), grid, args.tol).to_dict())
    ok = all(r["passed"] for r in reports)
    _emit(args, {"reports": reports, "passed": ok})
    return OK if ok else NEGATIVE


def cmd_example(args) -> int:
    lam = _lam(args)
    name = args.name
    if name == "two-holed-torus":
        _emit(args, two_holed_torus_example().to_dict())
    elif name == "two-holed-torus-flow":
        _emit(args, asm.two_holed_torus_flow(lam).to_dict())
    elif name == "xn":
        _emit(args, family_Xn(args.n or 1).to_dict())
    elif name == "construction":
        graphs = [family_Xn(i) for i in range(1, (args.n or 2) + 1)]
        _emit(args, asm.construction_7_3(graphs, seed=args.seed, lam=lam).to_dict())
    return OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, default=None,
                        help=f"block stretching parameter (default {DEFAULT_LAMBDA})")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="anoflip", description="Flips of totally periodic model flows.",
                epilog=SCHEMA_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("validate", cmd_validate, "check a fatgraph or flow")
    sp.add_argument("input", nargs="?", default="-")
    sp = add("build", cmd_build, "build a piece, a flow, or the cyclic construction")
    sp.add_argument("input", nargs="?", default="-")
    sp = add("flip", cmd_flip, "flip one piece of a flow")
    sp.add_argument("input", nargs="?", default="-")
    sp.add_argument("--piece", type=int)
    sp = add("compare", cmd_compare, "compare free homotopy data of two flows")
    sp.add_argument("inputs", nargs=2)
    sp.add_argument("--max-len", type=int, default=6)
    sp = add("classify", cmd_classify, "group flips of one flow into isotopy classes")
    sp.add_argument("inputs", nargs="+")
    sp.add_argument("--max-len", type=int, default=4)
    sp = add("search-equiv", cmd_search_equiv, "search for an orbit equivalence")
    sp.add_argument("inputs", nargs=2)
    sp.add_argument("--expect", choices=("found", "exhausted"))
    sp = add("transitive", cmd_transitive, "test transitivity of a flow")
    sp.add_argument("input", nargs="?", default="-")
    sp = add("itineraries", cmd_itineraries, "list periodic itineraries")
    sp.add_argument("input", nargs="?", default="-")
    sp.add_argument("--max-len", type=int, default=6)

    sp = add("integrate", cmd_integrate, "integrate one orbit of the block flow")
    sp.add_argument("--x", type=float, default=0.0)
    sp.add_argument("--y", type=float, default=None, help="default: entry face")
    sp.add_argument("--z", type=float, default=0.0)
    sp.add_argument("--sign", type=int, choices=(1, -1), default=1)
    sp.add_argument("--dt", type=float, default=DEFAULT_DT)
    sp.add_argument("--t-max", type=float, default=DEFAULT_T_MAX)
    sp.add_argument("--stride", type=int, default=1)
    sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = add("cone-check", cmd_cone_check, "empirical cone expansion of a gluing")
    sp.add_argument("--matrix", help="a,b,c,d (default 0,1,1,0)")
    sp.add_argument("--grid", help="NX or NXxNZ entry points (default 30)")
    sp.add_argument("--halfwidth", type=float, default=0.1)
    sp.add_argument("--threshold", type=float, default=1.0)
    sp.add_argument("--sign", type=int, choices=(1, -1), default=1)
    sp.add_argument("--dt", type=float, default=DEFAULT_DT)
    sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = add("verify-block", cmd_verify_block, "sampled checks of the block field")
    sp.add_argument("--grid", help="points per axis (default 50)")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--sign", type=int, choices=(1, -1), default=None)

    sp = add("example", cmd_example, "print a built-in example")
    sp.add_argument("name", choices=EXAMPLES)
    sp.add_argument("--n", type=int, default=None)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "verify-block":
        args.sign_given = args.sign is not None
    if args.lam is not None and not (args.lam > 0 and math.isfinite(args.lam)):
        sys.stderr.write("--lambda must be a positive number\n")
        return USAGE
    try:
        return args.fn(args)
    except UsageError as exc:
        sys.stderr.write(f"anoflip: {exc}\n{SCHEMA_HELP}")
        return USAGE
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        sys.stderr.write(f"anoflip: {type(exc).__name__}: {exc}\n")
        return USAGE


def main() -> None:
    raise SystemExit(run())
