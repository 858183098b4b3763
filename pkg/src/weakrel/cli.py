"""Command-line entry point: ``weakrel analyze FILE [options]``.

Exit status is 0 on success, 1 for unreadable or ill-formed input and 2
when an iteration budget runs out.
"""
from __future__ import annotations

import argparse
import sys

from weakrel.analyzer import DEFAULT_MAX_STEPS, AnalysisBudgetExceeded, analyze, report
from weakrel.core import DomainError
from weakrel.disjunctive import DEFAULT_CAP
from weakrel.lang import DOMAINS, parse_program
from weakrel.normalization import BudgetExceeded
from weakrel.posets import parse_order
from weakrel.syntax import ParseError

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; status 2 is reserved for budget exhaustion
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="weakrel", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    a = sub.add_parser("analyze", help="run the abstract interpreter on a program")
    a.add_argument("file", help="program source, or - for stdin")
    a.add_argument("--domain", choices=DOMAINS, help="overrides the program header")
    a.add_argument("--order", help="subset:a,b,c | int | multiset:a,b | prefix | substring | scattered")
    a.add_argument("--universe", help="comma-separated constants for const2, e.g. a,b,c")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--max-disjuncts", type=_positive, default=DEFAULT_CAP,
                   help="disjunct cap per cluster for directed-disj (default %(default)s)")
    a.add_argument("--budget", type=_positive, default=DEFAULT_MAX_STEPS,
                   help="maximum worklist steps (default %(default)s)")
    a.add_argument("--disjunctive-merge", action="store_true",
                   help="keep disjunctions at merge nodes for directed-disj")
    return ap


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def run_analyze(args) -> int:
    try:
        text = _read(args.file)
    except OSError as e:
        print(f"weakrel: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        order = parse_order(args.order) if args.order else None
        universe = None
        if args.universe:
            universe = tuple(dict.fromkeys(u.strip() for u in args.universe.split(",") if u.strip()))
        p = parse_program(text, domain=args.domain, order=order, universe=universe)
    except ParseError as e:
        print(f"{args.file}:{e}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, ValueError) as e:
        print(f"weakrel: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        r = analyze(p, max_steps=args.budget, cap=args.max_disjuncts,
                    disjunctive_merge=args.disjunctive_merge)
    except (AnalysisBudgetExceeded, BudgetExceeded) as e:
        print(f"weakrel: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except DomainError as e:
        print(f"weakrel: {e}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(report(r, args.format))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "analyze":
        return run_analyze(args)
    return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
