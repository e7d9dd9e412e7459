"""Command-line front end.

Exit status: 0 success, 1/2 for NotEquivalent/Undetermined verdicts of
``equiv``, 64 usage, 65 unreadable or invalid input, 70 internal
inconsistency.
"""
import argparse
import dataclasses
import hashlib
import json
import math
import sys

import numpy as np

from . import __version__
from .errors import (DimensionMismatch, DoublePointError, InvalidSpec, OutOfRange, ParseError,
                     ValidationError)
from .hamiltonians import DEFAULT_GRID, DEFAULT_RADIUS, intersection_chart, sample_hamiltonians
from .ingest import load_germ_pair
from .invariants import INFINITY, analyze, decide_equivalence, moduli_count, s_value
from .linalg import DEFAULT_TOL
from .normal_forms import NormalFormSpec, roundtrip_verify, synthesize_doc
from .selftest import run_selftest

EX_USAGE = 64
EX_DATAERR = 65
EX_SOFTWARE = 70

_INPUT_ERRORS = (ValidationError, ParseError, InvalidSpec, DimensionMismatch, OutOfRange)
VERDICT_EXIT = {"Equivalent": 0, "NotEquivalent": 1, "Undetermined": 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ------------------------------------------------------------ serializing

def _plain(obj):
    """Convert numpy and complex values into JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _float_text(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"infinity"' if x > 0 else '"-infinity"'
    if x == 0.0:
        return "0.0"
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _emit(obj, indent, out, compact=False):
    pad = "  " * indent
    if compact and isinstance(obj, (dict, list)):
        items = sorted(obj) if isinstance(obj, dict) else obj
        out.append("{" if isinstance(obj, dict) else "[")
        for i, item in enumerate(items):
            if isinstance(obj, dict):
                out.append(json.dumps(item) + ": ")
                item = obj[item]
            _emit(item, 0, out, True)
            if i + 1 < len(items):
                out.append(", ")
        out.append("}" if isinstance(obj, dict) else "]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, key in enumerate(sorted(obj)):
            out.append(f"{pad}  {json.dumps(key)}: ")
            _emit(obj[key], indent + 1, out)
            out.append(",\n" if i + 1 < len(obj) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
        elif all(not isinstance(v, (dict, list)) for v in obj):
            out.append("[")
            for i, v in enumerate(obj):
                _emit(v, indent, out)
                if i + 1 < len(obj):
                    out.append(", ")
            out.append("]")
        else:
            out.append("[\n")
            for i, v in enumerate(obj):
                out.append(pad + "  ")
                _emit(v, indent + 1, out)
                out.append(",\n" if i + 1 < len(obj) else "\n")
            out.append(pad + "]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float_text(obj))
    else:
        out.append(json.dumps(str(obj)))


def dumps(obj, compact=False):
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    out = []
    _emit(_plain(obj), 0, out, compact)
    return "".join(out) + ("" if compact else "\n")


def _text(obj, indent=0):
    lines = []
    pad = "  " * indent
    for key in sorted(obj):
        value = obj[key]
        if isinstance(value, dict) and value:
            lines.append(f"{pad}{key}:")
            lines.extend(_text(value, indent + 1))
        else:
            lines.append(f"{pad}{key}: {dumps(value, compact=True)}")
    return lines


def render(doc, fmt):
    doc = _plain(doc)
    if fmt == "json":
        return dumps(doc)
    return "\n".join(_text(doc)) + "\n"


# ---------------------------------------------------------------- reports

def _moduli_value(m):
    return "infinity" if m == INFINITY else int(m)


def _read(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    return doc, hashlib.sha256(raw).hexdigest()


def _load(path, tol):
    doc, digest = _read(path)
    return load_germ_pair(doc, tol), digest


def _genericity_table(rep):
    return {name: {"holds": c.holds, "measured": c.measured, "required": c.required, "note": c.note}
            for name, c in rep.conditions.items()}


def germ_report(gp, digest, tol):
    a = analyze(gp, tol=tol)
    s = s_value(gp.n, gp.k1, gp.k2)
    warnings = list(gp.warnings)
    numbers = None
    failed = a.report.failures()
    if a.numbers is not None:
        numbers = {"raw": a.numbers.raw, "collapsed": a.numbers.collapsed,
                   "distinct": a.numbers.distinct_count, "route_gap": a.numbers.route_gap}
    field = None
    if gp.k1 + gp.k2 > 2 * gp.n and s >= 1:
        field = {"status": "not sampled; run the hamiltonians subcommand"}
    out = {
        "input_sha256": digest,
        "n": gp.n,
        "k1": gp.k1,
        "k2": gp.k2,
        "s": s,
        "moduli": _moduli_value(moduli_count((gp.k1, gp.k2), gp.n)),
        "genericity": _genericity_table(a.report),
        "characteristic_numbers": numbers,
        "hamiltonian_field": field,
        "warnings": warnings,
    }
    if numbers is None and s > 0:
        out["undetermined"] = "characteristic numbers unavailable: " + \
            (", ".join(failed) + " failed" if failed else "reduction failed")
    return out


# ------------------------------------------------------------ subcommands

def _cmd_report(args, tol):
    gp, digest = _load(args.file, tol)
    return germ_report(gp, digest, tol), 0


def _cmd_equiv(args, tol):
    gp1, d1 = _load(args.file1, tol)
    gp2, d2 = _load(args.file2, tol)
    v = decide_equivalence(gp1, gp2, tol)
    doc = {"input_sha256": [d1, d2], "verdict": v.status, "rule": v.rule, "reason": v.reason,
           "details": v.details}
    return doc, VERDICT_EXIT[v.status]


def _cmd_normal_form(args, tol):
    doc, digest = _read(args.spec)
    spec = NormalFormSpec.from_doc(doc)
    rep = roundtrip_verify(spec, tol)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(dumps(synthesize_doc(spec)))
    rep["input_sha256"] = digest
    rep["output"] = args.output
    return rep, 0


def _cmd_hamiltonians(args, tol):
    gp, digest = _load(args.file, tol)
    if args.grid < 3 or args.grid % 2 == 0:
        raise UsageError("--grid must be an odd integer >= 3")
    if not args.radius > 0:
        raise UsageError("--radius must be positive")
    chart = intersection_chart(gp, tol)
    fld = sample_hamiltonians(gp, chart, args.grid, args.radius, tol, workers=args.workers)
    if args.format == "json":
        doc = fld.to_json()
        doc["input_sha256"] = digest
        return doc, 0
    return fld.to_csv(), 0


def _cmd_moduli(args, tol):
    k2 = args.k if args.k2 is None else args.k2
    m = moduli_count((args.k, k2), args.n)
    if args.format == "text":
        return f"{_moduli_value(m)}\n", 0
    return {"k1": args.k, "k2": k2, "n": args.n, "s": s_value(args.n, args.k, k2),
            "moduli": _moduli_value(m)}, 0


def _cmd_selftest(args, tol):
    doc = run_selftest(args.seed, tol)
    return doc, 0 if doc["status"] == "pass" else EX_SOFTWARE


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--tolerance", type=float, default=default(None), metavar="RANK_TOL",
                        help="rank tolerance (default 1e-9)")
    parser.add_argument("--format", choices=("json", "text"), default=default("text"))
    parser.add_argument("--seed", type=int, default=default(0))


def build_parser():
    p = _Parser(prog="doublepoint", description="Invariants of double points of immersed submanifolds.")
    p.add_argument("--version", action="version", version=__version__)
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("report", help="genericity and invariants of one germ pair")
    c.add_argument("file")
    c.set_defaults(func=_cmd_report)

    c = sub.add_parser("equiv", help="decide equivalence of two germ pairs")
    c.add_argument("file1")
    c.add_argument("file2")
    c.set_defaults(func=_cmd_equiv)

    c = sub.add_parser("normal-form", help="synthesize a normal form and verify it")
    c.add_argument("spec")
    c.add_argument("-o", "--output")
    c.set_defaults(func=_cmd_normal_form)

    c = sub.add_parser("hamiltonians", help="sample the characteristic Hamiltonians")
    c.add_argument("file")
    c.add_argument("--grid", type=int, default=DEFAULT_GRID)
    c.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    c.add_argument("--workers", type=int, default=None)
    c.set_defaults(func=_cmd_hamiltonians)

    c = sub.add_parser("moduli", help="number of moduli for stratum dimension k in R^2n")
    c.add_argument("k", type=int)
    c.add_argument("n", type=int)
    c.add_argument("--k2", type=int, default=None)
    c.set_defaults(func=_cmd_moduli)

    c = sub.add_parser("selftest", help="seeded randomized property checks")
    c.set_defaults(func=_cmd_selftest)

    for c in sub.choices.values():
        _global_flags(c, suppress=True)
    return p


def execute(argv, stdout=None, stderr=None):
    """Run one command; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        try:
            tol = DEFAULT_TOL if args.tolerance is None else dataclasses.replace(
                DEFAULT_TOL, rank_tol=args.tolerance)
        except ValueError as exc:
            raise UsageError(f"--tolerance: {exc}") from exc
        result, code = args.func(args, tol)
    except UsageError as exc:
        print(exc, file=stderr)
        return EX_USAGE
    except _INPUT_ERRORS as exc:
        print(f"error ({exc.code}): {exc}", file=stderr)
        return EX_DATAERR
    except DoublePointError as exc:
        print(f"internal inconsistency ({exc.code}): {exc}", file=stderr)
        return EX_SOFTWARE
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return EX_DATAERR
    stdout.write(result if isinstance(result, str) else render(result, args.format))
    return code


def main(argv=None):
    sys.exit(execute(sys.argv[1:] if argv is None else argv))
