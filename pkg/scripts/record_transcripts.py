"""Regenerate fixtures/programs/clique_*.dl and fixtures/transcripts/*.json.

clingo transcripts are real runs of ``python3 -m clingo`` (pip package
``clingo``). No DLV binary is available, so the DLV transcripts are written
in DLV's output format from the same clingo run; their command field says so.

    python3 scripts/record_transcripts.py
"""

from __future__ import annotations

import json
import re
import sys
from pathlib import Path

from aspunit.adapters import RunConfiguration, SolverKind, invoke_solver, parse_clingo_output, release
from aspunit.core import RuleKind
from aspunit.parser import parse_program, serialize_program
from aspunit.runner import load_suite
from aspunit.testlang import case_programs
from aspunit.units import assemble_unit

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
PROGRAMS = FIXTURES / "programs"
TRANSCRIPTS = FIXTURES / "transcripts"

CLINGO_TMP = re.compile(r"/\S*aspunit-\S+\.lp")
CLINGO = RunConfiguration("record", SolverKind.CLINGO, sys.executable, "-m clingo")


def export_clique_units() -> None:
    loaded = load_suite(str(FIXTURES / "clique_failing.aspt"))
    for case in loaded.suite.cases():
        global_program, _ = case_programs(loaded.suite, case, loaded.programs)
        unit, _ = assemble_unit(global_program, case, loaded.programs)
        (PROGRAMS / f"clique_{case.name}.dl").write_text(serialize_program(unit), encoding="utf-8")


def dlv_stdout(result, weak: bool) -> str:
    lines = ["DLV [build BEN/Dec 17 2012   gcc 4.6.1]", ""]
    if not weak:
        lines += [str(a) for a in result.answer_sets]
    else:
        # DLV prints each improving model; emulate with the costs clingo reported
        order = sorted(range(len(result)), key=lambda i: result.cost_vectors[i], reverse=True)
        for i in order:
            cost = result.cost_vectors[i]
            pairs = ", ".join(f"[{c}:{lvl}]" for lvl, c in sorted(cost.costs)) if cost.costs else ""
            lines += [f"Best model: {result.answer_sets[i]}", f"Cost ([Weight:Level]): <{pairs}>"]
    return "\n".join(lines) + "\n\n"


def record(path: Path) -> None:
    program, _ = parse_program(path.read_text(encoding="utf-8"), path.name)
    levels = sorted({r.level for r in program if r.kind is RuleKind.WEAK})
    transcript = release(invoke_solver(CLINGO, serialize_program(program, "clingo"), optimize=bool(levels)))
    # keep the temp path out of the stored command
    stored = transcript.command.rsplit(" ", 1)[0] + f" {path.stem}.lp"
    stdout = transcript.stdout.replace(CLINGO_TMP.search(transcript.command).group(0), f"{path.stem}.lp")
    data = transcript.to_json() | {
        "command": stored, "stdout": stdout, "program": path.name, "levels": levels, "wallTime": 0.0,
    }
    (TRANSCRIPTS / f"{path.stem}.clingo.json").write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")

    result = parse_clingo_output(transcript, levels)
    dlv = {
        "command": f"dlv {path.stem}.dl (DLV output format, synthesized from the clingo run)",
        "exitCode": 0,
        "stdout": dlv_stdout(result, bool(levels)),
        "stderr": "",
        "wallTime": 0.0,
        "maxModels": 0,
        "program": path.name,
        "levels": levels,
    }
    (TRANSCRIPTS / f"{path.stem}.dlv.json").write_text(json.dumps(dlv, indent=2) + "\n", encoding="utf-8")


def main() -> None:
    TRANSCRIPTS.mkdir(exist_ok=True)
    export_clique_units()
    for path in sorted(PROGRAMS.glob("*.dl")):
        record(path)
        print("recorded", path.name)


if __name__ == "__main__":
    main()
