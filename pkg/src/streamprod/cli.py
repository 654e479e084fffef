"""Command line front end.

Exit codes: 0 productive / evidence obtained, 1 not productive,
2 only bounded evidence or unknown, 3 input or usage error.
"""
from __future__ import annotations

import argparse
import sys
import time
from typing import List, Optional

from .parser import SpecSyntaxError, format_spec, load_spec, parse_term
from .prover import PLACEHOLDER, invoke_external_prover
from .report import (
    AnalysisReport,
    certificate_to_dict,
    run_to_dict,
    spec_to_dict,
    verdict_to_dict,
)
from .streamspec import StreamSpec, UnfoldError, extend_with_overflow, needs_unfolding, unfold, validate
from .strategy import Budgets, Outcome, check_productivity, eval_prefix
from .terms import Sort, show
from .tpdb import ExportError, export_tpdb
from .trs import RuleError

EXIT_OK, EXIT_NOT_PRODUCTIVE, EXIT_BOUNDED, EXIT_INPUT = 0, 1, 2, 3

OUTCOME_EXIT = {
    Outcome.PRODUCTIVE: EXIT_OK,
    Outcome.NOT_PRODUCTIVE: EXIT_NOT_PRODUCTIVE,
    Outcome.BOUNDED_PRODUCTIVE: EXIT_BOUNDED,
    Outcome.UNKNOWN: EXIT_BOUNDED,
}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def split_terms(text: str) -> List[str]:
    """Split a comma separated list of terms at commas outside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur).strip())
    return [t for t in out if t]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print the analysis report as JSON")
    p = _Parser(prog="streamprod", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", parents=[common], help="check the stream specification format")
    v.add_argument("file")

    u = sub.add_parser("unfold", parents=[common], help="unfold into the basic format")
    u.add_argument("file")
    u.add_argument("-o", "--output")

    e = sub.add_parser("eval", parents=[common], help="compute a prefix of a stream term")
    e.add_argument("file")
    e.add_argument("--term", required=True)
    e.add_argument("-n", type=int, default=10)
    e.add_argument("--max-steps", type=int, default=Budgets.max_steps)
    e.add_argument("--max-size", type=int, default=Budgets.max_term_size)

    c = sub.add_parser("check", parents=[common], help="decide or gather evidence for productivity")
    c.add_argument("file")
    roots = c.add_mutually_exclusive_group()
    roots.add_argument("--roots", action="append", help="comma separated root terms")
    roots.add_argument("--all-small", type=int, metavar="SIZE",
                       help="use every ground stream term with at most SIZE symbols")
    c.add_argument("--max-steps", type=int, default=Budgets.max_steps)
    c.add_argument("--max-size", type=int, default=Budgets.max_term_size)
    c.add_argument("--prefix", type=int, default=Budgets.prefix_length,
                   help="elements to evaluate for bounded evidence")
    c.add_argument("--prover", help=f"prover command, {PLACEHOLDER} is replaced by the problem file")
    c.add_argument("--timeout", type=float, default=Budgets.prover_timeout)

    x = sub.add_parser("export", parents=[common], help="write the overflow extension in TPDB format")
    x.add_argument("file")
    x.add_argument("-o", "--output", required=True)
    return p


def _load(path: str):
    try:
        spec_file = load_spec(path)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}")
    except (SpecSyntaxError, RuleError) as e:
        raise InputError(f"{path}: {e}")
    return spec_file.to_spec()


def _prepare(path: str):
    raw = _load(path)
    try:
        spec = unfold(raw)
    except UnfoldError as e:
        raise InputError(f"{path}: cannot unfold: {e}")
    return spec, spec is not raw


def _budgets(args, **extra) -> Budgets:
    return Budgets(max_steps=args.max_steps, max_term_size=args.max_size, **extra)


def _emit(args, report: AnalysisReport, text: str):
    if getattr(args, "json", False):
        print(report.to_json())
    else:
        print(text)


def _validation_text(report) -> str:
    lines = [f"validation: {report.verdict}"]
    lines.extend(f"  {v}" for v in report.violations)
    lines.extend(f"  assumed: {a}" for a in report.assumptions)
    return "\n".join(lines)


def cmd_validate(args) -> int:
    start = time.perf_counter()
    spec = _load(args.file)
    rep = validate(spec)
    text = _validation_text(rep)
    if not rep.passed and needs_unfolding(spec):
        text += "\n  hint: 'streamprod unfold' brings the rules into the basic format"
    report = AnalysisReport(
        spec_to_dict(spec), rep.to_dict(), timings={"total": time.perf_counter() - start}
    )
    _emit(args, report, text)
    return EXIT_OK if rep.passed else EXIT_INPUT


def cmd_unfold(args) -> int:
    start = time.perf_counter()
    spec, changed = _prepare(args.file)
    rep = validate(spec)
    text = format_spec(spec, header=f"unfolded from {args.file}" if changed else "")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    report = AnalysisReport(
        spec_to_dict(spec, changed), rep.to_dict(), timings={"total": time.perf_counter() - start}
    )
    if getattr(args, "json", False):
        print(report.to_json())
    elif not args.output:
        sys.stdout.write(text)
    if not rep.passed:
        print(_validation_text(rep), file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def _require_valid(spec: StreamSpec, args, changed: bool, start: float):
    rep = validate(spec)
    if not rep.passed:
        report = AnalysisReport(
            spec_to_dict(spec, changed), rep.to_dict(), timings={"total": time.perf_counter() - start}
        )
        if getattr(args, "json", False):
            print(report.to_json())
        raise InputError(_validation_text(rep))
    return rep


def _parse_root(spec: StreamSpec, text: str):
    try:
        return parse_term(text, spec, Sort.STREAM)
    except SpecSyntaxError as e:
        raise InputError(f"term {text!r}: {e}")


def cmd_eval(args) -> int:
    start = time.perf_counter()
    spec, changed = _prepare(args.file)
    rep = _require_valid(spec, args, changed, start)
    t = _parse_root(spec, args.term)
    if not t.ground:
        raise InputError(f"term {args.term!r} is not ground")
    if args.n < 0:
        raise InputError("-n must be non-negative")
    budgets = _budgets(args, prefix_length=args.n)
    res = eval_prefix(spec, t, args.n, budgets)
    values = [show(v) for v in res.values]
    outcome = Outcome.BOUNDED_PRODUCTIVE if res.ok else Outcome.UNKNOWN
    verdict = {
        "outcome": outcome.value,
        "n": len(values) if res.ok else None,
        "notes": [] if res.ok else [f"element {res.failed_index + 1} not produced: {res.reason}"],
        "display": f"BOUNDED_PRODUCTIVE({len(values)})" if res.ok else "UNKNOWN",
    }
    cert = {
        "kind": "boundedEvidence",
        "reason": f"first {len(values)} element(s) of {show(t)}",
        "root": show(t),
        "transcript": "",
        "prefixes": {show(t): values},
        "cycle": None,
    }
    report = AnalysisReport(
        spec_to_dict(spec, changed),
        rep.to_dict(),
        verdict,
        cert,
        [run_to_dict(r, f"element {i + 1}") for i, r in enumerate(res.runs)],
        budgets.to_dict(),
        {"total": time.perf_counter() - start},
    )
    text = f"{show(t)} = {' : '.join(values + ['...'])}" if values else f"{show(t)}: no elements"
    if not res.ok:
        text += f"\nelement {res.failed_index + 1} not produced: {res.reason}"
    _emit(args, report, text)
    return EXIT_OK if res.ok else EXIT_BOUNDED


def cmd_check(args) -> int:
    start = time.perf_counter()
    spec, changed = _prepare(args.file)
    rep = _require_valid(spec, args, changed, start)
    roots = None
    if args.roots:
        roots = [_parse_root(spec, s) for chunk in args.roots for s in split_terms(chunk)]
        for r in roots:
            if not r.ground:
                raise InputError(f"root {show(r)} is not ground")
    extra = {"prefix_length": args.prefix, "prover_timeout": args.timeout}
    if args.all_small is not None:
        extra["all_small_size"] = args.all_small
    budgets = _budgets(args, **extra)
    prover = None
    if args.prover:
        if PLACEHOLDER not in args.prover:
            raise InputError(f"--prover needs a {PLACEHOLDER} placeholder for the problem file")
        prover = lambda problem: invoke_external_prover(args.prover, problem, args.timeout)  # noqa: E731
    try:
        verdict = check_productivity(spec, roots, budgets, prover)
    except RuleError as e:
        raise InputError(str(e))
    traces = []
    cert = verdict.certificate
    if cert is not None and cert.run is not None:
        traces.append(run_to_dict(cert.run, f"certificate: {show(cert.root)}"))
    elif roots is not None:
        traces.extend(run_to_dict(run, label) for label, run in verdict.runs.items())
    report = AnalysisReport(
        spec_to_dict(spec, changed),
        rep.to_dict(),
        verdict_to_dict(verdict),
        certificate_to_dict(cert),
        traces,
        budgets.to_dict(),
        {"total": time.perf_counter() - start},
    )
    lines = [f"verdict: {verdict}"]
    if cert is not None:
        lines.append(f"certificate: {cert.kind.value}: {cert.reason}")
    lines.extend(f"  {n}" for n in verdict.notes)
    _emit(args, report, "\n".join(lines))
    return OUTCOME_EXIT[verdict.outcome]


def cmd_export(args) -> int:
    start = time.perf_counter()
    spec, changed = _prepare(args.file)
    rep = _require_valid(spec, args, changed, start)
    try:
        text = export_tpdb(extend_with_overflow(spec))
    except (ExportError, RuleError) as e:
        raise InputError(str(e))
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(text)
    report = AnalysisReport(
        spec_to_dict(spec, changed), rep.to_dict(), timings={"total": time.perf_counter() - start}
    )
    _emit(args, report, f"wrote {args.output}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "unfold": cmd_unfold,
    "eval": cmd_eval,
    "check": cmd_check,
    "export": cmd_export,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as e:
        print(f"streamprod: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
