"""Command-line entry point: ``aspunit run|check|solve``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from . import adapters
from .adapters import ConfigurationError, Overrides, SolverError
from .diagnostics import DiagnosticError
from .report import FORMATS, render_report
from .runner import EXIT_ERROR, EXIT_PASS, RunOptions, check_suite, load_configurations, run_suite, solve_file
from .solver import GroundingError, SolverCapacityError


def _solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="run configuration file (default: ./aspunit.config.json if present)")
    p.add_argument("--solver", choices=[k.value for k in adapters.SolverKind], help="solver kind")
    p.add_argument("--solver-path", help="external solver executable")
    p.add_argument("--options", help="solver options, replacing those of the suite")
    p.add_argument("--max-models", type=int, help="answer-set cap (0 = all)")
    p.add_argument("--timeout", type=int, help="solver timeout in seconds")


def _overrides(args) -> Overrides:
    return Overrides(args.solver, args.solver_path, args.options, args.max_models, args.timeout)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aspunit", description="Unit tests for answer set programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a test suite")
    run.add_argument("suite")
    _solver_flags(run)
    run.add_argument("--format", choices=FORMATS, default="text")
    run.add_argument("--out", help="write the report here instead of stdout")
    run.add_argument("--jobs", type=int, default=0, help="parallel test cases (default: processor count)")
    run.add_argument("--base-dir", help="directory for relative input paths (default: the suite's)")

    check = sub.add_parser("check", help="parse and validate a suite without solving")
    check.add_argument("suite")
    check.add_argument("--base-dir")

    solve = sub.add_parser("solve", help="print the answer sets of one program")
    solve.add_argument("program")
    _solver_flags(solve)
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    if args.jobs < 0:
        print("aspunit: --jobs must be non-negative", file=sys.stderr)
        return EXIT_ERROR
    options = RunOptions(_overrides(args), args.config, args.base_dir, args.jobs)
    report = run_suite(args.suite, options)
    _emit(render_report(report, args.format), args.out)
    return report.exit_code


def cmd_check(args) -> int:
    diagnostics, code = check_suite(args.suite, args.base_dir)
    for d in diagnostics:
        print(d)
    print("ok" if code == EXIT_PASS else "errors found")
    return code


def cmd_solve(args) -> int:
    try:
        configs = load_configurations(args.config)
        name = Path(args.program).stem
        cfg = adapters.resolve_configuration(name, configurations=configs, overrides=_overrides(args))
        _, result = solve_file(args.program, cfg)
    except (DiagnosticError, ConfigurationError, SolverError, GroundingError, SolverCapacityError) as exc:
        print(f"aspunit: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for i, (a, cost) in enumerate(zip(result.answer_sets, result.cost_vectors), 1):
        line = f"Answer {i}: {a}"
        if cost is not None:
            line += f" cost {cost}"
        print(line)
    if result.has_costs:
        print(f"Best cost: {result.best_cost}")
    print(f"{len(result)} answer sets{'' if result.complete else ' (truncated)'}")
    return EXIT_PASS


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "check": cmd_check, "solve": cmd_solve}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
