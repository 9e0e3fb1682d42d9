"""Command-line entry point.

    archpat validate FILE
    archpat check (FILE | --pattern ID) [--prop NAME]... [--max-states N]
                  [--max-time SECS] [--format human|json] [--workers N]
    archpat emit (FILE | --pattern ID) [-o OUT]
    archpat patterns list
    archpat explain LASSO_JSON

Exit codes: 0 success, 1 property violated (or lasso rejected),
2 invalid spec, 3 inconclusive, 4 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import TextIO

from . import __version__
from .certify import diagnose_lasso
from .checker import Inconclusive, Lasso, Limits, Verdict, check_all
from .model import Diagnostic, PatternSpec, Property
from .parser import Printer, parse_pattern, pretty_print
from .patterns import MUTANTS, PATTERN_IDS, UnknownPattern, get_pattern, get_spec
from .semantics import SemanticsError, compile_system
from .smv import UnsupportedAtom, UnsupportedSort, emit_file
from .validate import has_errors, validate_spec

EXIT_OK, EXIT_VIOLATED, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3, 4

REPORT_SCHEMA = "archpat-report/1"
LASSO_SCHEMA = "archpat-lasso/1"


@dataclass
class PropertyResult:
    name: str
    status: str  # PASS | FAIL | INCONCLUSIVE | ERROR
    holds: bool | None
    states: int = 0
    product_states: int = 0
    time_ms: float = 0.0
    lasso: str | None = None
    detail: str = ""


@dataclass
class RunReport:
    command: str
    spec_name: str | None = None
    properties: list[PropertyResult] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    exit_code: int = EXIT_OK

    def to_json(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "spec_name": self.spec_name,
            "properties": [
                {"name": p.name, "status": p.status, "holds": p.holds, "states": p.states,
                 "product_states": p.product_states, "time_ms": round(p.time_ms, 3),
                 "lasso": p.lasso, "detail": p.detail}
                for p in self.properties
            ],
            "diagnostics": [_diag_json(d) for d in self.diagnostics],
            "exit_code": self.exit_code,
        }


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _diag_json(d: Diagnostic) -> dict:
    loc = None
    if d.span is not None:
        loc = {"file": d.span.file, "line": d.span.line_start, "column": d.span.col_start}
    return {"severity": d.severity, "message": d.message, "code": d.code, "location": loc}


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    if not v > 0 or v != v or v == float("inf"):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="archpat", description="Specify and verify architecture patterns.")
    ap.add_argument("--version", action="version", version=f"archpat {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    v = sub.add_parser("validate", help="parse and validate a .arch file")
    v.add_argument("file")
    v.add_argument("--format", choices=("human", "json"), default="human")

    c = sub.add_parser("check", help="check LTL properties")
    _add_source(c)
    c.add_argument("--prop", action="append", default=None, metavar="NAME",
                   help="property to check (repeatable; default: all)")
    c.add_argument("--max-states", type=_positive_int, default=Limits.max_states)
    c.add_argument("--max-time", type=_positive_float, default=Limits.max_time, metavar="SECS")
    c.add_argument("--format", choices=("human", "json"), default="human")
    c.add_argument("--workers", type=_positive_int, default=1)
    c.add_argument("--engine", choices=("scc", "ndfs"), default="scc")
    c.add_argument("--out-dir", default=None,
                   help="where the report and lasso files go (default: beside the input file, "
                        "or the current directory for --pattern)")

    e = sub.add_parser("emit", help="emit SMV text")
    _add_source(e)
    e.add_argument("-o", "--output", default=None, help="output file (default: stdout)")

    p = sub.add_parser("patterns", help="built-in pattern catalog")
    p.add_argument("action", choices=("list",))

    x = sub.add_parser("explain", help="re-certify and print a counterexample file")
    x.add_argument("lasso")
    return ap


def _add_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", nargs="?")
    p.add_argument("--pattern", metavar="ID", help="a built-in pattern or mutant")


# ---------------------------------------------------------------- output

class _Style:
    def __init__(self, stream: TextIO):
        env = os.environ.get("ARCHPAT_COLOR")
        if env is not None:
            self.on = env != "0"
        else:
            self.on = hasattr(stream, "isatty") and stream.isatty()

    def __call__(self, text: str, code: str) -> str:
        return f"\033[{code}m{text}\033[0m" if self.on else text


_STATUS_COLOR = {"PASS": "32", "FAIL": "31", "INCONCLUSIVE": "33", "ERROR": "31"}


def _print_table(report: RunReport, out: TextIO) -> None:
    style = _Style(out)
    rows = [(p.name, p.status, str(p.states), f"{p.time_ms:.0f}") for p in report.properties]
    head = ("property", "verdict", "states", "ms")
    widths = [max(len(r[i]) for r in rows + [head]) for i in range(4)]
    print(f"{head[0]:<{widths[0]}}  {head[1]:<{widths[1]}}  {head[2]:>{widths[2]}}  "
          f"{head[3]:>{widths[3]}}", file=out)
    for p, r in zip(report.properties, rows):
        verdict = style(f"{r[1]:<{widths[1]}}", _STATUS_COLOR[p.status])
        print(f"{r[0]:<{widths[0]}}  {verdict}  {r[2]:>{widths[2]}}  {r[3]:>{widths[3]}}",
              file=out)
        if p.lasso:
            print(f"    counterexample: {p.lasso}", file=out)
        elif p.detail and p.status != "PASS":
            print(f"    {p.detail}", file=out)
    counts = {s: sum(p.status == s for p in report.properties) for s in _STATUS_COLOR}
    summary = ", ".join(f"{n} {s.lower()}" for s, n in counts.items() if n)
    n = len(report.properties)
    print(f"{report.spec_name}: {n} propert{'y' if n == 1 else 'ies'}, {summary}", file=out)


# ---------------------------------------------------------------- loading

def _load_spec(args, report: RunReport, err: TextIO) -> tuple[PatternSpec | None, Path | None]:
    """Returns the spec (or None after recording why) and the source path."""
    if (args.file is None) == (args.pattern is None):
        raise UsageError(f"archpat {args.command}: give exactly one of FILE or --pattern")
    if args.pattern is not None:
        try:
            return get_spec(args.pattern), None
        except UnknownPattern:
            known = ", ".join(list(PATTERN_IDS) + list(MUTANTS))
            raise UsageError(f"unknown pattern {args.pattern!r} (known: {known})")
    path = Path(args.file)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    res = parse_pattern(text, str(path))
    diags = list(res.diagnostics)
    if res.spec is not None:
        diags += validate_spec(res.spec)
    report.diagnostics = diags
    for d in diags:
        print(str(d), file=err)
    if res.spec is None or has_errors(diags):
        report.exit_code = EXIT_INVALID
        return None, path
    return res.spec, path


# ---------------------------------------------------------------- commands

def _cmd_validate(args, out, err) -> RunReport:
    report = RunReport("validate")
    args.pattern = None
    spec, _ = _load_spec(args, report, err)
    if spec is not None:
        report.spec_name = spec.name
        if args.format == "human":
            warn = sum(not d.is_error for d in report.diagnostics)
            print(f"{spec.name}: valid ({warn} warning{'s' if warn != 1 else ''})", file=out)
    if args.format == "json":
        print(json.dumps(report.to_json(), indent=2), file=out)
    return report


def _safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", text).strip("_") or "property"


def lasso_document(spec: PatternSpec, prop: Property, lasso: Lasso) -> dict:
    """Serializable counterexample; states are flat name -> value maps."""
    system = compile_system(spec)
    if spec.property(prop.name) is None:
        spec = replace(spec, properties=spec.properties + (prop,))

    def state(s):
        return {k: list(v) if isinstance(v, tuple) else v for k, v in system.to_mapping(s).items()}

    return {
        "schema": LASSO_SCHEMA,
        "spec_name": spec.name,
        "property": prop.name,
        "formula": Printer().ltl(prop.formula),
        "prefix": [state(s) for s in lasso.prefix],
        "cycle": [state(s) for s in lasso.cycle],
        "spec_text": pretty_print(spec),
    }


def _result(name: str, res) -> PropertyResult:
    if isinstance(res, Verdict):
        st = res.stats
        return PropertyResult(name, "PASS" if res.holds else "FAIL", res.holds, st.system_states,
                              st.product_states, st.time_ms)
    if isinstance(res, Inconclusive):
        st = res.stats
        return PropertyResult(name, "INCONCLUSIVE", None, st.system_states, st.product_states,
                              st.time_ms, detail=res.reason)
    return PropertyResult(name, "ERROR", None, detail=str(res))


def _cmd_check(args, out, err) -> RunReport:
    report = RunReport("check")
    spec, path = _load_spec(args, report, err)
    if spec is None:
        if args.format == "json":
            print(json.dumps(report.to_json(), indent=2), file=out)
        return report
    report.spec_name = spec.name
    names = args.prop if args.prop else [p.name for p in spec.properties]
    for n in names:
        if spec.property(n) is None:
            raise UsageError(f"unknown property {n!r} in {spec.name}")
    # repeated --prop flags check once, in the order given
    names = list(dict.fromkeys(names))

    out_dir = Path(args.out_dir) if args.out_dir else (path.parent if path else Path.cwd())
    limits = Limits(args.max_states, args.max_time)
    results = check_all(spec, limits, workers=args.workers, names=names, engine=args.engine)

    for name, res in results:
        pr = _result(name, res)
        if isinstance(res, Verdict) and not res.holds:
            doc = lasso_document(spec, spec.property(name), res.counterexample)
            out_dir.mkdir(parents=True, exist_ok=True)
            target = out_dir / f"{_safe_name(spec.name)}.{_safe_name(name)}.lasso.json"
            target.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
            pr.lasso = str(target)
        report.properties.append(pr)

    statuses = {p.status for p in report.properties}
    if "ERROR" in statuses:
        report.exit_code = EXIT_INVALID
    elif "FAIL" in statuses:
        report.exit_code = EXIT_VIOLATED
    elif "INCONCLUSIVE" in statuses:
        report.exit_code = EXIT_INCONCLUSIVE

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{_safe_name(spec.name)}.report.json").write_text(
        json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8")
    if args.format == "json":
        print(json.dumps(report.to_json(), indent=2), file=out)
    else:
        _print_table(report, out)
    return report


def _cmd_emit(args, out, err) -> RunReport:
    report = RunReport("emit")
    spec, _ = _load_spec(args, report, err)
    if spec is None:
        return report
    report.spec_name = spec.name
    try:
        text = emit_file(spec).rendered
    except (UnsupportedAtom, UnsupportedSort) as exc:
        print(f"error: {exc}", file=err)
        report.diagnostics.append(Diagnostic("error", str(exc), None, "smv"))
        report.exit_code = EXIT_INVALID
        return report
    if args.output is None:
        out.write(text)
    else:
        try:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.output}: {exc}")
        print(f"wrote {args.output}", file=err)
    return report


def _cmd_patterns(args, out, err) -> RunReport:
    report = RunReport("patterns")
    for pid in PATTERN_IDS:
        entry = get_pattern(pid)
        spec = entry.spec
        print(f"{pid:<10} {len(spec.architecture.instances)} components, "
              f"{len(spec.properties)} properties", file=out)
        note = entry.notes.strip().splitlines()[0] if entry.notes.strip() else ""
        if note:
            print(f"           {note}", file=out)
    print("mutants:", file=out)
    for name, (_, base, failing) in MUTANTS.items():
        print(f"  {name:<24} of {base}; expected to fail {failing}", file=out)
    return report


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    return str(v)


def _cmd_explain(args, out, err) -> RunReport:
    report = RunReport("explain")
    try:
        doc = json.loads(Path(args.lasso).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {args.lasso}: {exc}")
    if not isinstance(doc, dict) or doc.get("schema") != LASSO_SCHEMA:
        raise UsageError(f"{args.lasso} is not a {LASSO_SCHEMA} document")
    try:
        spec_text, prop_name = doc["spec_text"], doc["property"]
        prefix, cycle = doc["prefix"], doc["cycle"]
    except KeyError as exc:
        raise UsageError(f"{args.lasso}: missing field {exc}")
    res = parse_pattern(spec_text, f"{args.lasso}#spec_text")
    if res.spec is None or has_errors(validate_spec(res.spec)):
        for d in res.diagnostics:
            print(str(d), file=err)
        report.exit_code = EXIT_INVALID
        return report
    spec = res.spec
    report.spec_name = spec.name
    prop = spec.property(prop_name)
    if prop is None:
        raise UsageError(f"{args.lasso}: property {prop_name!r} is not declared in the spec")
    system = compile_system(spec)
    try:
        lasso = Lasso([system.from_mapping(s) for s in prefix],
                      [system.from_mapping(s) for s in cycle])
    except (KeyError, TypeError, AttributeError) as exc:
        print(f"rejected: malformed state ({exc})", file=out)
        report.exit_code = EXIT_VIOLATED
        return report

    style = _Style(out)
    print(f"{spec.name} / {prop.name}: {Printer().ltl(prop.formula)}", file=out)
    prev: dict = {}
    for i, s in enumerate(lasso.states):
        if i == len(lasso.prefix):
            print("-- cycle starts here --", file=out)
        try:
            shown = system.observe(s)
        except SemanticsError:
            shown = system.to_mapping(s)
        changed = {k: v for k, v in shown.items() if prev.get(k, object()) != v}
        print(f"state {i}:" + ("" if changed else " (no change)"), file=out)
        for k, v in changed.items():
            print(f"  {k} = {_format_value(v)}", file=out)
        prev = shown
    print("-- back to cycle start --", file=out)

    reason = diagnose_lasso(spec, prop.formula, lasso)
    if reason is None:
        print(style("certified: the trace is a run of the spec and violates the property", "32"),
              file=out)
    else:
        print(style(f"rejected: {reason}", "31"), file=out)
        report.exit_code = EXIT_VIOLATED
    return report


_COMMANDS = {"validate": _cmd_validate, "check": _cmd_check, "emit": _cmd_emit,
             "patterns": _cmd_patterns, "explain": _cmd_explain}


def run(argv: list[str] | None = None, out: TextIO | None = None,
        err: TextIO | None = None) -> RunReport:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return RunReport("usage", exit_code=EXIT_USAGE)
    except SystemExit as exc:
        # --help and --version
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return RunReport("help", exit_code=code)


def main(argv: list[str] | None = None) -> int:
    code = run(argv).exit_code
    sys.exit(code)


if __name__ == "__main__":
    main()
