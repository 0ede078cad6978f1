"""Run configurations and external solver adapters.

External solvers get the program in a temporary file passed as the last
argument. Their stdout is parsed into a SolverResult:

* DLV style: one ``{lit, lit}`` line per model; with weak constraints,
  ``Best model: {...}`` followed by ``Cost ([Weight:Level]): <[w:l],...>``.
* clingo style: ``Answer: N`` then a line of space-separated literals,
  ``Optimization: c1 c2`` (highest priority first), and a footer of
  ``SATISFIABLE``, ``UNSATISFIABLE``, ``OPTIMUM FOUND`` or ``UNKNOWN``.
"""

from __future__ import annotations

import json
import os
import re
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from .core import AnswerSet, CostVector, SolverResult
from .diagnostics import DiagnosticError
from .parser import parse_ground_literals

DEFAULT_CONFIG_FILE = "aspunit.config.json"
DEFAULT_TIMEOUT = 60


class SolverKind(Enum):
    INTERNAL = "internal"
    DLV = "dlv"
    CLINGO = "clingo"


class ConfigurationError(ValueError):
    pass


class SolverError(RuntimeError):
    def __init__(self, message: str, transcript: Optional["SolverTranscript"] = None):
        super().__init__(message)
        self.transcript = transcript


class SolverNotFound(SolverError):
    pass


class SolverTimeout(SolverError):
    pass


class OutputFormatError(SolverError):
    pass


@dataclass(frozen=True)
class RunConfiguration:
    name: str = "default"
    kind: SolverKind = SolverKind.INTERNAL
    solver_path: Optional[str] = None
    options: str = ""
    max_models: int = 0
    timeout_seconds: int = DEFAULT_TIMEOUT

    def __post_init__(self):
        if self.kind is not SolverKind.INTERNAL and not self.solver_path:
            raise ConfigurationError(f"configuration {self.name}: a {self.kind.value} solver needs a path")
        if self.max_models < 0:
            raise ConfigurationError("max_models must be non-negative")
        if self.timeout_seconds <= 0:
            raise ConfigurationError("timeout must be positive")


@dataclass(frozen=True)
class SolverTranscript:
    command: str
    exit_code: int
    stdout: str
    stderr: str = ""
    wall_time: float = 0.0
    max_models: int = 0
    # temporary program file, kept when the run failed
    program_path: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "exitCode": self.exit_code,
            "stdout": self.stdout,
            "stderr": self.stderr,
            "wallTime": self.wall_time,
            "maxModels": self.max_models,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SolverTranscript":
        return cls(
            data["command"], data["exitCode"], data["stdout"], data.get("stderr", ""),
            data.get("wallTime", 0.0), data.get("maxModels", 0),
        )

    @classmethod
    def load(cls, path) -> "SolverTranscript":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# Configuration


def _kind_of(value: str) -> SolverKind:
    try:
        return SolverKind(value.lower())
    except ValueError:
        raise ConfigurationError(f"unknown solver kind {value!r}; use internal, dlv or clingo") from None


def guess_kind(path: str) -> SolverKind:
    """DLV unless the executable name says clingo or clasp."""
    name = os.path.basename(path).lower()
    if "clingo" in name or "clasp" in name:
        return SolverKind.CLINGO
    return SolverKind.DLV


def load_configurations(path) -> Dict[str, RunConfiguration]:
    """Read ``{"configurations": [{"name", "kind", "path", "options", "maxModels", "timeoutSeconds"}]}``."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read configuration file {path}: {exc}") from None
    entries = data.get("configurations") if isinstance(data, dict) else None
    if not isinstance(entries, list):
        raise ConfigurationError(f"{path}: expected an object with a 'configurations' list")
    configs: Dict[str, RunConfiguration] = {}
    for entry in entries:
        if not isinstance(entry, dict) or not isinstance(entry.get("name"), str):
            raise ConfigurationError(f"{path}: every configuration needs a string 'name'")
        name = entry["name"]
        if name in configs:
            raise ConfigurationError(f"{path}: duplicate configuration {name}")
        configs[name] = RunConfiguration(
            name=name,
            kind=_kind_of(entry.get("kind", "internal")),
            solver_path=entry.get("path"),
            options=entry.get("options", "") or "",
            max_models=int(entry.get("maxModels", 0)),
            timeout_seconds=int(entry.get("timeoutSeconds", DEFAULT_TIMEOUT)),
        )
    return configs


@dataclass(frozen=True)
class Overrides:
    """Command-line settings; None means not given."""

    solver: Optional[str] = None
    solver_path: Optional[str] = None
    options: Optional[str] = None
    max_models: Optional[int] = None
    timeout: Optional[int] = None


def resolve_configuration(
    invocation_name: str,
    suite_path: Optional[str] = None,
    suite_options: Optional[str] = None,
    configurations: Optional[Mapping[str, RunConfiguration]] = None,
    overrides: Overrides = Overrides(),
    new_options: Optional[str] = None,
) -> RunConfiguration:
    """Combine settings; precedence from highest: command line, the test
    case's newOptions (options only), the suite invocation, the
    configuration file entry named after the invocation, built-in defaults.
    """
    entry = (configurations or {}).get(invocation_name)
    kind = entry.kind if entry else SolverKind.INTERNAL
    path = entry.solver_path if entry else None
    options = entry.options if entry else ""
    max_models = entry.max_models if entry else 0
    timeout = entry.timeout_seconds if entry else DEFAULT_TIMEOUT

    if suite_path:
        path = suite_path
        kind = guess_kind(suite_path)
    if suite_options is not None:
        options = suite_options
    if new_options is not None:
        options = new_options

    if overrides.solver_path:
        path = overrides.solver_path
        kind = guess_kind(path)
    if overrides.solver:
        kind = _kind_of(overrides.solver)
    if overrides.options is not None:
        options = overrides.options
    if overrides.max_models is not None:
        max_models = overrides.max_models
    if overrides.timeout is not None:
        timeout = overrides.timeout

    if kind is not SolverKind.INTERNAL and not path:
        raise ConfigurationError(
            f"no solver path for invocation {invocation_name!r}: not in the suite, "
            f"the command line or a configuration named {invocation_name!r}"
        )
    if kind is SolverKind.INTERNAL:
        path = None
    return RunConfiguration(invocation_name, kind, path, options, max_models, timeout)


def internal_max_models(cfg: RunConfiguration) -> int:
    """Model cap for the internal solver; ``-n N``/``-n=N`` in the options wins."""
    args = shlex.split(cfg.options)
    for i, arg in enumerate(args):
        m = re.fullmatch(r"(?:-n|--models)=(\d+)", arg)
        if m:
            return int(m.group(1))
        if arg in ("-n", "--models") and i + 1 < len(args) and args[i + 1].isdigit():
            return int(args[i + 1])
    return cfg.max_models


# ---------------------------------------------------------------------------
# Invocation

_SEMAPHORE = threading.BoundedSemaphore(os.cpu_count() or 1)


def solver_command(cfg: RunConfiguration, program_file: str, optimize: bool = False) -> List[str]:
    args = [cfg.solver_path, *shlex.split(cfg.options)]
    if cfg.kind is SolverKind.DLV:
        if cfg.max_models:
            args.append(f"-n={cfg.max_models}")
    elif cfg.kind is SolverKind.CLINGO:
        if optimize and not any(a.startswith("--opt-mode") for a in args):
            args.append("--opt-mode=optN")
        args.append(str(cfg.max_models))
    else:
        raise ValueError("the internal solver is not a subprocess")
    args.append(program_file)
    return args


def invoke_solver(cfg: RunConfiguration, program_text: str, optimize: bool = False) -> SolverTranscript:
    """Run an external solver on ``program_text`` and capture its output.

    Raises SolverNotFound, SolverTimeout. The temporary program file is
    deleted after a clean run and kept (see ``program_path``) otherwise.
    """
    suffix = ".lp" if cfg.kind is SolverKind.CLINGO else ".dl"
    fd, program_file = tempfile.mkstemp(prefix="aspunit-", suffix=suffix)
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(program_text)
    args = solver_command(cfg, program_file, optimize)
    command = shlex.join(args)
    started = time.monotonic()
    with _SEMAPHORE:
        try:
            proc = subprocess.run(
                args, capture_output=True, timeout=cfg.timeout_seconds,
                encoding="utf-8", errors="replace",
            )
        except FileNotFoundError:
            raise SolverNotFound(
                f"solver executable not found: {cfg.solver_path} (program kept at {program_file})"
            ) from None
        except PermissionError:
            raise SolverNotFound(
                f"solver executable not runnable: {cfg.solver_path} (program kept at {program_file})"
            ) from None
        except subprocess.TimeoutExpired as exc:
            out = exc.stdout.decode() if isinstance(exc.stdout, bytes) else (exc.stdout or "")
            transcript = SolverTranscript(command, -1, out, "", time.monotonic() - started,
                                          cfg.max_models, program_file)
            raise SolverTimeout(
                f"solver timed out after {cfg.timeout_seconds}s (program kept at {program_file})", transcript
            ) from None
    transcript = SolverTranscript(command, proc.returncode, proc.stdout, proc.stderr,
                                  time.monotonic() - started, cfg.max_models, program_file)
    return transcript


def release(transcript: SolverTranscript) -> SolverTranscript:
    """Delete the transcript's temporary program file after a successful parse."""
    if transcript.program_path and os.path.exists(transcript.program_path):
        os.unlink(transcript.program_path)
    return replace(transcript, program_path=None)


def parse_transcript(kind: SolverKind, transcript: SolverTranscript,
                     levels: Optional[Sequence[int]] = None) -> SolverResult:
    if kind is SolverKind.DLV:
        return parse_dlv_output(transcript)
    if kind is SolverKind.CLINGO:
        return parse_clingo_output(transcript, levels)
    raise ValueError(f"no output parser for {kind.value}")


def run_external(cfg: RunConfiguration, program_text: str,
                 levels: Optional[Sequence[int]] = None) -> tuple:
    """Invoke and parse; returns (SolverResult, SolverTranscript)."""
    transcript = invoke_solver(cfg, program_text, optimize=bool(levels))
    try:
        result = parse_transcript(cfg.kind, transcript, levels)
    except OutputFormatError as exc:
        if transcript.exit_code != 0 or transcript.stderr.strip():
            raise SolverError(
                f"solver exited with code {transcript.exit_code}: "
                f"{transcript.stderr.strip() or exc} (program kept at {transcript.program_path})",
                transcript,
            ) from None
        raise SolverError(f"{exc} (program kept at {transcript.program_path})", transcript) from None
    return result, release(transcript)


# ---------------------------------------------------------------------------
# Output parsers


def _literals(text: str, separator: Optional[str], transcript: SolverTranscript, line_no: int) -> AnswerSet:
    try:
        return AnswerSet(frozenset(parse_ground_literals(text, "solver output", separator)))
    except (DiagnosticError, ValueError) as exc:
        raise OutputFormatError(f"malformed model on output line {line_no}: {exc}", transcript) from None


def _build(models: List[AnswerSet], costs: List[Optional[CostVector]], complete: bool) -> SolverResult:
    # solvers may report a model twice (e.g. while proving optimality); keep the first
    seen: Dict[AnswerSet, int] = {}
    keep_sets, keep_costs = [], []
    for a, c in zip(models, costs):
        if a in seen:
            i = seen[a]
            if c is not None and (keep_costs[i] is None or c < keep_costs[i]):
                keep_costs[i] = c
            continue
        seen[a] = len(keep_sets)
        keep_sets.append(a)
        keep_costs.append(c)
    if not any(c is not None for c in keep_costs):
        keep_costs = []
    return SolverResult(tuple(keep_sets), tuple(keep_costs), complete)


_DLV_COST_RE = re.compile(r"Cost \(\[Weight:Level\]\):\s*<(.*)>\s*$")
_DLV_PAIR_RE = re.compile(r"\[?\s*(\d+)\s*:\s*(\d+)\s*\]?")


def parse_dlv_output(t: SolverTranscript) -> SolverResult:
    models: List[AnswerSet] = []
    costs: List[Optional[CostVector]] = []
    for no, raw in enumerate(t.stdout.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("DLV ["):
            continue
        if line.startswith("Best model:"):
            line = line[len("Best model:"):].strip()
        if line.startswith("{"):
            if not line.endswith("}"):
                raise OutputFormatError(f"malformed model on output line {no}: {raw!r}", t)
            models.append(_literals(line[1:-1], ",", t, no))
            costs.append(None)
            continue
        m = _DLV_COST_RE.match(line)
        if m:
            if not models:
                raise OutputFormatError(f"cost line {no} without a preceding model", t)
            pairs = _DLV_PAIR_RE.findall(m.group(1))
            if not pairs:
                raise OutputFormatError(f"malformed cost on output line {no}: {raw!r}", t)
            totals: Dict[int, int] = {}
            for weight, level in pairs:
                totals[int(level)] = totals.get(int(level), 0) + int(weight)
            costs[-1] = CostVector.of(totals)
            continue
        raise OutputFormatError(f"unexpected output line {no}: {raw!r}", t)
    complete = not (t.max_models > 0 and len(models) >= t.max_models)
    return _build(models, costs, complete)


_ANSWER_RE = re.compile(r"Answer:\s*\d+\b")
_MODELS_RE = re.compile(r"Models\s*:\s*(\d+)(\+?)")


def parse_clingo_output(t: SolverTranscript, levels: Optional[Sequence[int]] = None) -> SolverResult:
    """Parse clingo's default text output.

    ``levels`` are the program's weak-constraint levels; clingo prints one
    cost per level, highest priority first. Without them a single cost maps
    to level 1 and n costs to levels n..1.
    """
    lines = t.stdout.splitlines()
    models: List[AnswerSet] = []
    costs: List[Optional[CostVector]] = []
    footer = None
    more = None
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if _ANSWER_RE.match(line):
            if i + 1 >= len(lines):
                raise OutputFormatError(f"answer header on line {i + 1} without a model line", t)
            models.append(_literals(lines[i + 1].strip(), None, t, i + 2))
            costs.append(None)
            i += 2
            continue
        if line.startswith("Optimization:") and footer is None:
            if not models:
                raise OutputFormatError(f"optimization line {i + 1} without a preceding model", t)
            values = [int(v) for v in line.split(":", 1)[1].split()]
            costs[-1] = _clingo_costs(values, levels)
        elif line in ("SATISFIABLE", "UNSATISFIABLE", "OPTIMUM FOUND", "UNKNOWN"):
            footer = line
        elif footer is not None:
            m = _MODELS_RE.match(line)
            if m:
                more = bool(m.group(2))
        i += 1
    if footer is None:
        raise OutputFormatError("clingo output has no result line (SATISFIABLE/UNSATISFIABLE/...)", t)
    if footer == "UNKNOWN":
        complete = False
    elif footer in ("UNSATISFIABLE", "OPTIMUM FOUND"):
        complete = True
    elif more is not None:
        complete = not more
    else:
        complete = not (t.max_models > 0 and len(models) >= t.max_models)
    return _build(models, costs, complete)


def _clingo_costs(values: Sequence[int], levels: Optional[Sequence[int]]) -> CostVector:
    if levels:
        ordered = sorted(set(levels), reverse=True)
        if len(ordered) == len(values):
            return CostVector.of(dict(zip(ordered, values)))
    n = len(values)
    return CostVector.of({n - k: v for k, v in enumerate(values)})
