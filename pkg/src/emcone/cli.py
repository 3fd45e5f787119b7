"""Command-line front end.

Cone spec files are JSON lines; each line is an object such as::

    {"label": "wedge", "generators": [[1, 0], [1, 2]], "lattice": null,
     "inner_product": null, "pieces": null}

Rationals are written as strings "p/q".  Exit codes: 0 success, 1 usage or
parse error, 2 validation error, 3 a verification failed, 4 insufficient
germ order.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from gmpy2 import mpq

from . import linalg as la
from .coalgebra import coproduct
from .cones import ConeError, LatticeCone, transverse
from .eulermaclaurin import (
    I_integral,
    S_closed,
    S_open,
    catalog,
    mu,
    mu_from_factorization,
    numeric_crosscheck,
    verify_em,
    verify_subdivision_properties,
)
from .germs import GermError, InsufficientOrder, germ_to_json, render_text
from .linalg import InnerProduct
from .subdivision import Subdivision, analyze, smooth_subdivide, triangulate, validate_subdivision

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_FAILED, EXIT_ORDER = 0, 1, 2, 3, 4


class SpecError(ValueError):
    pass


# --- spec files -------------------------------------------------------------


def _parse_rat(x):
    if isinstance(x, bool) or isinstance(x, float):
        raise SpecError(f"rational entries must be integers or 'p/q' strings, got {x!r}")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, str):
        try:
            return mpq(x.strip())
        except ValueError as exc:
            raise SpecError(f"cannot parse rational {x!r}") from exc
    raise SpecError(f"cannot parse rational {x!r}")


def _parse_matrix(rows, what: str) -> list:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise SpecError(f"{what} must be a list of vectors")
    return [tuple(_parse_rat(x) for x in r) for r in rows]


class ConeSpec:
    def __init__(self, cone: LatticeCone, qf: InnerProduct, label: str = "", pieces=None):
        self.cone = cone
        self.qf = qf
        self.label = label
        self.pieces = pieces


def parse_spec(obj: dict) -> ConeSpec:
    if not isinstance(obj, dict):
        raise SpecError("each line must be a JSON object")
    if "generators" not in obj:
        raise SpecError("missing 'generators'")
    gens = _parse_matrix(obj["generators"], "generators")
    k = obj.get("ambient_dim")
    if k is None:
        if not gens:
            raise SpecError("ambient_dim is required for the zero cone")
        k = len(gens[0])
    if not isinstance(k, int) or k < 1:
        raise SpecError("ambient_dim must be a positive integer")
    for g in gens:
        if len(g) != k:
            raise SpecError(f"generator {list(map(str, g))} has the wrong length")
        if la.is_zero(g):
            raise SpecError("zero vector among the generators")
    lattice = obj.get("lattice")
    lattice = None if lattice is None else _parse_matrix(lattice, "lattice")
    gram = obj.get("inner_product")
    try:
        qf = InnerProduct(tuple(_parse_matrix(gram, "inner_product"))) if gram else InnerProduct()
        lc = LatticeCone.from_generators(gens, lattice, ambient_dim=k)
    except SpecError:
        raise
    except ValueError as exc:
        raise ConeError(str(exc)) from exc
    pieces = obj.get("pieces")
    if pieces is not None:
        pieces = [_parse_matrix(p, "pieces") for p in pieces]
    return ConeSpec(lc, qf, str(obj.get("label", "")), pieces)


def read_specs(path: str) -> list:
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    specs = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SpecError(f"line {n}: {exc}") from exc
        specs.append(parse_spec(obj))
    if not specs:
        raise SpecError("no cone specs found")
    return specs


def spec_to_json(lc: LatticeCone, label: str = "", qf: InnerProduct | None = None) -> str:
    obj = {
        "label": label,
        "ambient_dim": lc.ambient_dim,
        "generators": [[str(a) for a in g] for g in lc.primary_generators],
        "lattice": [[str(a) for a in v] for v in lc.lattice],
        "inner_product": [[str(a) for a in r] for r in qf.gram] if qf and qf.gram else None,
    }
    return json.dumps(obj)


# --- rendering --------------------------------------------------------------


def fmt_vec(v: Sequence) -> str:
    return "(" + ",".join(str(mpq(a)) for a in v) + ")"


def cone_json(lc: LatticeCone) -> dict:
    return {
        "dim": lc.dim,
        "generators": [[str(a) for a in g] for g in lc.primary_generators],
        "lattice": [[str(a) for a in v] for v in lc.lattice],
        "pointed": lc.is_pointed,
    }


def cone_text(lc: LatticeCone) -> str:
    if lc.is_zero:
        return "{0}"
    gens = ", ".join(fmt_vec(g) for g in lc.primary_generators)
    lat = ", ".join(fmt_vec(v) for v in lc.lattice)
    return f"<{gens}> lattice Z<{lat}>"


class Output:
    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.lines: list = []

    def emit(self, text: str, data):
        if self.as_json:
            self.lines.append(json.dumps(data, ensure_ascii=False, sort_keys=True))
        else:
            self.lines.append(text)

    def flush(self):
        if self.lines:
            sys.stdout.write("\n".join(self.lines) + "\n")


# --- subcommands ------------------------------------------------------------


def _subdivision(spec: ConeSpec, smooth: bool) -> Subdivision:
    if spec.pieces is not None:
        return Subdivision.from_generators(spec.cone, spec.pieces)
    return smooth_subdivide(spec.cone) if smooth else triangulate(spec.cone)


def cmd_faces(spec, args, out):
    fs = spec.cone.faces
    text = "\n".join(f"[{i}] dim {f.dim}: {cone_text(f)}" for i, f in enumerate(fs))
    out.emit(text, {"label": spec.label, "faces": [cone_json(f) for f in fs]})
    return EXIT_OK


def cmd_transverse(spec, args, out):
    fs = spec.cone.faces
    if not 0 <= args.face < len(fs):
        raise SpecError(f"face index {args.face} out of range (0..{len(fs) - 1})")
    t = transverse(spec.cone, fs[args.face], spec.qf)
    out.emit(cone_text(t), {"label": spec.label, "face": cone_json(fs[args.face]), "transverse": cone_json(t)})
    return EXIT_OK


def cmd_coproduct(spec, args, out):
    terms = sorted(coproduct(spec.cone, spec.qf), key=lambda t: (t[0][1].dim, t[0][1].key))
    text = "\n".join(f"{cone_text(a)} ⊗ {cone_text(b)}" for (a, b), _ in terms)
    data = [{"left": cone_json(a), "right": cone_json(b), "coefficient": str(c)} for (a, b), c in terms]
    out.emit(text, {"label": spec.label, "terms": data})
    return EXIT_OK


def cmd_subdivide(spec, args, out):
    s = smooth_subdivide(spec.cone) if args.smooth else triangulate(spec.cone)
    rep = validate_subdivision(s)
    lines = [f"{cone_text(p)}  w={p.index}" for p in s.pieces]
    lines.append(f"valid: {rep.valid}")
    out.emit("\n".join(lines), {
        "label": spec.label,
        "pieces": [dict(cone_json(p), index=p.index) for p in s.pieces],
        "valid": rep.valid,
    })
    return EXIT_OK if rep.valid else EXIT_FAILED


def cmd_analyze(spec, args, out):
    s = _subdivision(spec, args.smooth)
    rep = validate_subdivision(s)
    if not rep:
        raise ConeError(f"invalid subdivision: {rep.failure}")
    an = analyze(s)
    short = lambda c: "<" + ", ".join(fmt_vec(g) for g in c.generators) + ">"
    lines, data = [], {}
    for name, keys in an.classes.items():
        cones = [an.faces_P[k] for k in keys]
        lines.append(f"{name}: " + "; ".join(short(c) for c in cones))
        data[name] = [[[str(a) for a in g] for g in c.generators] for c in cones]
    lines.append("open faces: " + "; ".join(short(f.cone) for f in an.open_faces))
    lam = sorted(((lc.dim, lc.key), lc, l) for lc, l in an.lambdas.values())
    lines.append("lambda: " + "; ".join(f"{short(lc.cone)}:{l}" for _, lc, l in lam))
    data["open_faces"] = [cone_json(f) for f in an.open_faces]
    data["lambda"] = [{"cone": cone_json(lc), "lambda": l} for _, lc, l in lam]
    out.emit("\n".join(lines), {"label": spec.label, **data})
    return EXIT_OK


def _variant(args) -> str:
    return "open" if args.open else "closed"


def _germ_out(out, spec, g, extra=None):
    out.emit(render_text(g), {"label": spec.label, "germ": germ_to_json(g), **(extra or {})})


def cmd_sum(spec, args, out):
    f = S_open if args.open else S_closed
    _germ_out(out, spec, f(spec.cone, args.order), {"variant": _variant(args)})
    return EXIT_OK


def cmd_integral(spec, args, out):
    _germ_out(out, spec, I_integral(spec.cone))
    return EXIT_OK


def cmd_mu(spec, args, out):
    f = mu_from_factorization if args.via == "factorization" else mu
    _germ_out(out, spec, f(spec.cone, _variant(args), args.order, spec.qf), {"variant": _variant(args)})
    return EXIT_OK


def _verdict_lines(verdicts: dict, witnesses: dict) -> list:
    lines = []
    for name, ok in verdicts.items():
        lines.append(f"  {name}: {'pass' if ok else 'FAIL'}")
        if not ok and name in witnesses:
            lines.append(f"    difference: {witnesses[name]}")
    return lines


def cmd_verify_em(spec, args, out):
    rep = verify_em(spec.cone, args.order, spec.qf)
    head = f"{spec.label or cone_text(spec.cone)} at order {args.order}"
    if not rep.asserted:
        head += " (not strongly convex: reported, not asserted)"
    lines = [head] + _verdict_lines(rep.verdicts, rep.witnesses)
    out.emit("\n".join(lines), {
        "label": spec.label,
        "cone": cone_json(spec.cone),
        "order": args.order,
        "asserted": rep.asserted,
        "verdicts": rep.verdicts,
        "witnesses": rep.witnesses,
        "germs": {k: germ_to_json(g) for k, g in sorted(rep.germs.items())},
    })
    return EXIT_OK if rep.ok or not rep.asserted else EXIT_FAILED


def cmd_verify_subdivision(spec, args, out):
    s = _subdivision(spec, args.smooth)
    check = validate_subdivision(s)
    if not check:
        raise ConeError(f"invalid subdivision: {check.failure}")
    rep = verify_subdivision_properties(s, args.order, spec.qf)
    lines = [f"{spec.label or cone_text(spec.cone)}: {len(s.pieces)} pieces, order {args.order}"]
    lines += _verdict_lines(rep.verdicts, rep.witnesses)
    out.emit("\n".join(lines), {
        "label": spec.label,
        "pieces": [cone_json(p) for p in s.pieces],
        "order": args.order,
        "verdicts": rep.verdicts,
        "witnesses": {k: str(v) for k, v in rep.witnesses.items()},
    })
    return EXIT_OK if rep.ok else EXIT_FAILED


def run_catalog(args, out) -> int:
    status = EXIT_OK
    for entry in catalog():
        if args.emit_specs:
            out.lines.append(spec_to_json(entry.cone, entry.name))
            continue
        rep = verify_em(entry.cone, args.order)
        s = smooth_subdivide(entry.cone)
        smooth_ok = bool(validate_subdivision(s)) and all(p.is_smooth for p in s.pieces)
        num = numeric_crosscheck(entry.cone) if entry.cone.is_pointed else None
        ok = (rep.ok or not rep.asserted) and smooth_ok and (num is None or num.relative_error < 1e-9)
        if not ok:
            status = EXIT_FAILED
        flag = "" if rep.asserted else " (reported, not asserted)"
        lines = [f"{entry.name}: {'pass' if ok else 'FAIL'}{flag}"]
        lines += _verdict_lines(rep.verdicts, rep.witnesses)
        lines.append(f"  smooth_subdivision: {'pass' if smooth_ok else 'FAIL'} ({len(s.pieces)} pieces)")
        if num is not None:
            lines.append(f"  numeric_relative_error: {num.relative_error:.3e}")
        out.emit("\n".join(lines), {
            "name": entry.name,
            "ok": ok,
            "asserted": rep.asserted,
            "verdicts": rep.verdicts,
            "smooth_subdivision": smooth_ok,
            "numeric_relative_error": None if num is None else num.relative_error,
        })
    return status


COMMANDS = {
    "faces": cmd_faces,
    "transverse": cmd_transverse,
    "coproduct": cmd_coproduct,
    "subdivide": cmd_subdivide,
    "analyze-subdivision": cmd_analyze,
    "sum": cmd_sum,
    "integral": cmd_integral,
    "mu": cmd_mu,
    "verify-em": cmd_verify_em,
    "verify-subdivision": cmd_verify_subdivision,
}


def _order(text: str) -> int:
    d = int(text)
    if d < 0:
        raise argparse.ArgumentTypeError("order must be nonnegative")
    return d


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output, one JSON object per cone")
    p = argparse.ArgumentParser(prog="emcone", description="Exponential sums, integrals and Euler-Maclaurin checks on lattice cones.")
    sub = p.add_subparsers(dest="command", required=True)

    def spec_cmd(name, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.add_argument("spec", help="cone spec file (JSON lines), or - for stdin")
        return sp

    def variant(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--open", action="store_true")
        g.add_argument("--closed", action="store_true")

    spec_cmd("faces", "list faces with their lattices")
    spec_cmd("transverse", "transverse cone of a face").add_argument("--face", type=int, required=True)
    spec_cmd("coproduct", "terms of the coproduct")
    spec_cmd("subdivide", "triangulate, or subdivide into unimodular cones").add_argument("--smooth", action="store_true")
    spec_cmd("analyze-subdivision", "face classes of a subdivision").add_argument("--smooth", action="store_true")
    sp = spec_cmd("sum", "exponential sum as a germ")
    variant(sp)
    sp.add_argument("--order", type=_order, default=6)
    spec_cmd("integral", "exponential integral")
    sp = spec_cmd("mu", "interpolator")
    variant(sp)
    sp.add_argument("--order", type=_order, default=6)
    sp.add_argument("--via", choices=("projection", "factorization"), default="projection")
    spec_cmd("verify-em", "check the Euler-Maclaurin identities").add_argument("--order", type=_order, default=6)
    sp = spec_cmd("verify-subdivision", "check the subdivision properties")
    sp.add_argument("--order", type=_order, default=6)
    sp.add_argument("--smooth", action="store_true")
    sp = sub.add_parser("catalog", help="run the verification catalog", parents=[common])
    sp.add_argument("--order", type=_order, default=6)
    sp.add_argument("--emit-specs", action="store_true", help="print the catalog as spec lines instead")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    out = Output(args.json)
    try:
        if args.command == "catalog":
            status = run_catalog(args, out)
        else:
            status = EXIT_OK
            for spec in read_specs(args.spec):
                status = max(status, COMMANDS[args.command](spec, args, out))
    except SpecError as exc:
        print(f"emcone: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"emcone: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InsufficientOrder as exc:
        print(f"emcone: insufficient order: {exc}", file=sys.stderr)
        return EXIT_ORDER
    except (ConeError, GermError, ValueError) as exc:
        print(f"emcone: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
