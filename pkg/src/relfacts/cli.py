"""Command-line interface.

Exit codes: 0 = analysis ran and certified (PASS), 1 = analysis ran but a
certification failed (FAIL), 2 = usage or parse error.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional

from . import parity
from .errors import ConstraintParseError, ProtocolError, ResourceError
from .report import (
    ReportDocument,
    build_check_document,
    build_run_document,
    from_verify,
    render_text,
)
from .rng import MAX_SEED
from .verify import run_all_checks


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relfacts",
        description=(
            "Simulate sequential agent measurements on a shared three-qubit "
            "state and certify the four record-product constraints that "
            "admit no joint +/-1 assignment."))
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run", help="run a measurement flow and certify its constraints")
    run_p.add_argument(
        "scenario", choices=("lmz", "cdr"),
        help="lmz: single-experiment flow with lifted observables; "
             "cdr: reversal flow, one experiment per constraint")
    run_p.add_argument(
        "--experiment", choices=("1", "2", "3", "4", "all"),
        help="which reversal experiment to run (cdr only)")
    run_p.add_argument(
        "--shots", type=int, default=0,
        help="sampled repetitions per target (0 = exact certification only)")
    run_p.add_argument("--seed", type=int, default=0, help="master random seed")
    run_p.add_argument(
        "--tolerance", type=float, default=1e-9,
        help="certification tolerance on exact expectations")
    _add_output_flags(run_p)

    chk = sub.add_parser(
        "check-assignments",
        help="parity analysis: do the +/-1 product constraints admit a "
             "joint assignment?")
    chk.add_argument(
        "--constraints", type=Path,
        help="constraint file: lines like 'B1*A2*A3 = -1', '#' comments")
    chk.add_argument(
        "--builtin", choices=tuple(sorted(parity.BUILTIN_SYSTEMS)),
        help="analyze a built-in constraint system")
    _add_output_flags(chk)

    ver = sub.add_parser("verify", help="run every acceptance check")
    ver.add_argument(
        "--all", action="store_true", dest="all_checks",
        help="run the full sweep (default behavior)")
    _add_output_flags(ver)
    return parser


def _add_output_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--format", choices=("json", "text"), default="text", dest="fmt",
        help="report format (default text)")
    sub.add_argument(
        "--out", type=Path, default=None,
        help="write the report to this path instead of stdout")


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _emit(doc: ReportDocument, fmt: str, out: Optional[Path]) -> int:
    rendered = doc.to_json() if fmt == "json" else render_text(doc)
    if out is not None:
        out.write_text(rendered)
    else:
        sys.stdout.write(rendered)
    return 0 if doc.verdict == "PASS" else 1


def _cmd_run(args) -> int:
    if args.shots < 0:
        return _usage_error("--shots must be >= 0")
    if not 0 <= args.seed <= MAX_SEED:
        return _usage_error("--seed must be in [0, 2^64)")
    if not args.tolerance > 0:
        return _usage_error("--tolerance must be positive")
    if args.scenario == "lmz" and args.experiment is not None:
        return _usage_error("--experiment applies only to the cdr scenario")
    if args.scenario == "cdr" and args.experiment is None:
        return _usage_error("the cdr scenario needs --experiment {1,2,3,4,all}")
    doc = build_run_document(
        args.scenario, args.experiment, args.shots, args.seed, args.tolerance)
    return _emit(doc, args.fmt, args.out)


def _cmd_check(args) -> int:
    if (args.constraints is None) == (args.builtin is None):
        return _usage_error(
            "give exactly one of --constraints PATH or --builtin NAME")
    if args.builtin is not None:
        system = parity.BUILTIN_SYSTEMS[args.builtin]()
        command = f"check-assignments --builtin {args.builtin}"
        config = {"builtin": args.builtin}
    else:
        try:
            text = args.constraints.read_text()
        except OSError as exc:
            return _usage_error(f"cannot read {args.constraints}: {exc}")
        system = parity.parse_constraints(text)
        command = f"check-assignments --constraints {args.constraints}"
        config = {"constraints_path": str(args.constraints)}
    doc = build_check_document(command, system, config)
    return _emit(doc, args.fmt, args.out)


def _cmd_verify(args) -> int:
    rows, elapsed = run_all_checks()
    print(f"acceptance sweep took {elapsed:.2f} s", file=sys.stderr)
    doc = from_verify("verify --all", rows)
    return _emit(doc, args.fmt, args.out)


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "check-assignments":
            return _cmd_check(args)
        return _cmd_verify(args)
    except ConstraintParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ResourceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ProtocolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
