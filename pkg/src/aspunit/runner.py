"""Suite orchestration: load, assemble, solve, filter, evaluate."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

from . import adapters
from .adapters import ConfigurationError, Overrides, RunConfiguration, SolverError, SolverKind
from .assertions import AssertionOutcome, Status, evaluate_assertion
from .core import Program, RuleKind, SolverResult
from .diagnostics import DiagnosticError, ParseDiagnostic, error
from .parser import check_program_set, parse_program, serialize_program
from .solver import GroundingError, SolverCapacityError, solve
from .testlang import TestCase, TestSuite, case_programs, parse_test_suite, validate_case
from .units import apply_filter, assemble_unit

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


@dataclass(frozen=True)
class RunOptions:
    overrides: Overrides = Overrides()
    config_path: Optional[str] = None
    base_dir: Optional[str] = None
    jobs: int = 0


@dataclass(frozen=True)
class CaseReport:
    name: str
    mode: str
    outcomes: Tuple[AssertionOutcome, ...] = ()
    warnings: Tuple[str, ...] = ()
    # set when the case could not be run at all
    setup_error: Optional[str] = None
    rules: int = 0
    answer_sets: int = 0
    solver: str = ""
    transcript: Optional[str] = None
    duration_ms: int = 0

    @property
    def status(self) -> Status:
        if self.setup_error is not None or any(o.status is Status.ERROR for o in self.outcomes):
            return Status.ERROR
        if any(o.status is Status.FAIL for o in self.outcomes):
            return Status.FAIL
        return Status.PASS


@dataclass(frozen=True)
class TestReport:
    suite_name: str
    cases: Tuple[CaseReport, ...] = ()
    # problems that prevented the suite from running
    errors: Tuple[str, ...] = ()
    warnings: Tuple[str, ...] = ()
    started_at: str = field(default="", compare=False)

    __test__ = False

    @property
    def totals(self) -> Dict[str, int]:
        statuses = [c.status for c in self.cases]
        return {
            "passed": statuses.count(Status.PASS),
            "failed": statuses.count(Status.FAIL),
            "errored": statuses.count(Status.ERROR),
        }

    @property
    def exit_code(self) -> int:
        totals = self.totals
        if self.errors or totals["errored"]:
            return EXIT_ERROR
        if totals["failed"]:
            return EXIT_FAIL
        return EXIT_PASS


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def load_configurations(path: Optional[str]) -> Dict[str, RunConfiguration]:
    """Explicit path, else ``aspunit.config.json`` in the working directory when present."""
    if path is None:
        if not os.path.exists(adapters.DEFAULT_CONFIG_FILE):
            return {}
        path = adapters.DEFAULT_CONFIG_FILE
    return adapters.load_configurations(path)


@dataclass
class LoadedSuite:
    suite: TestSuite
    programs: Dict[str, Program]
    diagnostics: List[ParseDiagnostic]


def load_suite(suite_path: str, base_dir: Optional[str] = None) -> LoadedSuite:
    """Parse the suite and every input file it names.

    Raises DiagnosticError on anything that makes the suite unusable.
    """
    path = Path(suite_path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DiagnosticError([error(f"cannot read suite file {suite_path}: {exc.strerror}")]) from None
    suite, diagnostics = parse_test_suite(text, str(suite_path))
    root = Path(base_dir) if base_dir else path.parent
    programs: Dict[str, Program] = {}
    problems: List[ParseDiagnostic] = []
    for ref in suite.file_refs():
        file = root / ref
        try:
            source = file.read_text(encoding="utf-8")
        except OSError as exc:
            problems.append(error(f"cannot read input file {ref} (resolved to {file}): {exc.strerror}", str(suite_path)))
            continue
        try:
            programs[ref], warns = parse_program(source, ref)
            diagnostics.extend(warns)
        except DiagnosticError as exc:
            problems.extend(exc.diagnostics)
    if not problems:
        problems = [d for d in check_program_set(programs.values()) if d.is_error]
    if problems:
        raise DiagnosticError(problems)
    return LoadedSuite(suite, programs, diagnostics)


def solve_unit(cfg: RunConfiguration, program: Program) -> Tuple[SolverResult, Optional[str]]:
    """Solve with the configured solver; returns the result and the solver command line."""
    if cfg.kind is SolverKind.INTERNAL:
        return solve(program, max_models=adapters.internal_max_models(cfg)), None
    dialect = "clingo" if cfg.kind is SolverKind.CLINGO else "dlv"
    levels = sorted({r.level for r in program if r.kind is RuleKind.WEAK})
    result, transcript = adapters.run_external(cfg, serialize_program(program, dialect), levels or None)
    return result, transcript.command


def _strip(case: TestCase, message: str) -> str:
    prefix = f"{case.name}: "
    return message[len(prefix):] if message.startswith(prefix) else message


def run_case(loaded: LoadedSuite, case: TestCase, configs: Mapping[str, RunConfiguration],
             overrides: Overrides) -> CaseReport:
    started = time.monotonic()
    suite = loaded.suite
    warnings: List[str] = []
    partial = dict(name=case.name, mode=case.mode.value)

    def finish(**kw) -> CaseReport:
        ms = int((time.monotonic() - started) * 1000)
        return CaseReport(**partial, warnings=tuple(dict.fromkeys(warnings)), duration_ms=ms, **kw)

    problems = validate_case(suite, case, loaded.programs)
    warnings += [_strip(case, d.message) for d in problems if not d.is_error]
    errors = [_strip(case, d.message) for d in problems if d.is_error]
    if errors:
        return finish(setup_error="; ".join(errors))
    try:
        global_program, _ = case_programs(suite, case, loaded.programs)
        unit, unit_warnings = assemble_unit(global_program, case, loaded.programs)
        warnings += unit_warnings
        cfg = adapters.resolve_configuration(
            suite.invocation_name, suite.solver_path, suite.solver_options, configs, overrides, case.new_options
        )
    except DiagnosticError as exc:
        return finish(setup_error="; ".join(d.message for d in exc.diagnostics))
    except ConfigurationError as exc:
        return finish(setup_error=str(exc))

    solver_name = cfg.kind.value
    try:
        result, command = solve_unit(cfg, unit)
    except SolverError as exc:
        return finish(setup_error=f"solver error: {exc}", rules=len(unit), solver=solver_name,
                      transcript=exc.transcript.command if exc.transcript else None)
    except (GroundingError, SolverCapacityError) as exc:
        return finish(setup_error=f"solver error: {exc}", rules=len(unit), solver=solver_name)

    # with weak constraints the answer sets under test are the optimal ones
    result = result.optimal()
    selected = [unit.name_index[n] for n in case.selected_rule_names if n in unit.name_index]
    filtered = [apply_filter(a, case.filter, selected) for a in result.answer_sets]
    outcomes = tuple(evaluate_assertion(a, result, filtered) for a in case.assertions)
    return finish(outcomes=outcomes, rules=len(unit), answer_sets=len(result),
                  solver=solver_name, transcript=command)


def run_suite(suite_path: str, options: RunOptions = RunOptions()) -> TestReport:
    """Run every case of a suite; cases run concurrently, the report keeps suite order."""
    started_at = _now()
    name = Path(suite_path).stem
    try:
        configs = load_configurations(options.config_path)
    except ConfigurationError as exc:
        return TestReport(name, errors=(str(exc),), started_at=started_at)
    try:
        loaded = load_suite(suite_path, options.base_dir)
    except DiagnosticError as exc:
        return TestReport(name, errors=tuple(str(d) for d in exc.diagnostics), started_at=started_at)
    name = loaded.suite.invocation_name or name
    cases = loaded.suite.cases()
    jobs = options.jobs or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=max(1, min(jobs, len(cases) or 1))) as pool:
        reports = list(pool.map(lambda c: _guarded(loaded, c, configs, options.overrides), cases))
    return TestReport(name, tuple(reports), warnings=tuple(str(d) for d in loaded.diagnostics),
                      started_at=started_at)


def _guarded(loaded, case, configs, overrides) -> CaseReport:
    # a broken case never takes its siblings down
    try:
        return run_case(loaded, case, configs, overrides)
    except Exception as exc:  # noqa: BLE001
        return CaseReport(case.name, case.mode.value, setup_error=f"internal error: {type(exc).__name__}: {exc}")


def check_suite(suite_path: str, base_dir: Optional[str] = None) -> Tuple[List[ParseDiagnostic], int]:
    """Parse and validate without solving. Exit code 2 when any error was found."""
    try:
        loaded = load_suite(suite_path, base_dir)
    except DiagnosticError as exc:
        return exc.diagnostics, EXIT_ERROR
    diagnostics = list(loaded.diagnostics)
    for case in loaded.suite.cases():
        diagnostics.extend(validate_case(loaded.suite, case, loaded.programs))
    code = EXIT_ERROR if any(d.is_error for d in diagnostics) else EXIT_PASS
    return diagnostics, code


def solve_file(program_path: str, cfg: RunConfiguration) -> Tuple[Program, SolverResult]:
    """Parse one program file and solve it; raises DiagnosticError or SolverError."""
    try:
        text = Path(program_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DiagnosticError([error(f"cannot read {program_path}: {exc.strerror}")]) from None
    program, _ = parse_program(text, program_path)
    result, _ = solve_unit(cfg, program)
    return program, result
