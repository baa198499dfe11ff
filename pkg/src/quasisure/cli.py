"""Command-line entry point.

Exit status: 0 when every check passes or is inconclusive, 1 when some
check fails, 2 for unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import sys

from .exceptions import InputError, PreconditionError
from .scenario import (
    Check,
    RunOptions,
    dumps,
    emit_scenario,
    exit_code,
    load_scenario,
    report_document,
    run_checks,
    run_stabilize,
    select_checks,
)
from .uvol import gen_uncertain_vol

SCENARIO_COMMANDS = {
    "check": "run every check listed in the scenario",
    "hahn": "verify dominating partitions (and covers, if requested)",
    "condexp": "conditional sublinear expectations, their axioms and dominance",
    "stabilize": "close families under pasting",
    "martingale": "recursivity along the filtration and martingale classes",
    "oracle": "recompute engine claims by brute force",
}


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasisure", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in SCENARIO_COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--budget", type=_positive, help="stabilisation budget (members)")
        p.add_argument("--seed", type=int, help="add seeded random sample variables")
        p.add_argument("--exhaustive-limit", type=_positive, default=12,
                       help="largest atom count for subset enumeration (default 12)")
        p.add_argument("--timing", action="store_true", help="record per-check microseconds")
    g = sub.add_parser("gen-uvol", help="write an uncertain-volatility scenario")
    g.add_argument("--steps", type=int, required=True)
    g.add_argument("--vols", required=True, help="comma-separated positive rationals, e.g. 1,2")
    g.add_argument("--out", help="write the scenario here instead of stdout")
    return parser


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def run(args: argparse.Namespace) -> int:
    if args.command == "gen-uvol":
        vols = [v for v in args.vols.split(",") if v.strip()]
        _write(dumps(emit_scenario(gen_uncertain_vol(args.steps, vols))), args.out)
        return 0
    sc = load_scenario(args.scenario)
    opts = RunOptions(args.budget, args.seed, args.exhaustive_limit, args.timing)
    if args.command == "stabilize":
        report = run_stabilize(sc, opts)
    elif args.command == "oracle":
        report = run_checks(sc, [Check("oracle")], opts)
    else:
        report = run_checks(sc, select_checks(sc, args.command), opts)
    _write(dumps(report_document(report, sc)), args.out)
    return exit_code(report)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except (InputError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
