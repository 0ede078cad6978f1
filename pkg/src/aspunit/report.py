"""Report rendering: text, JSON and JUnit XML."""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from typing import List

from .assertions import Status
from .runner import CaseReport, TestReport

FORMATS = ("text", "json", "junit", "xunit")

_MARK = {Status.PASS: "PASS", Status.FAIL: "FAIL", Status.ERROR: "ERROR"}


def summary_line(report: TestReport) -> str:
    t = report.totals
    return f"{t['passed']} passed, {t['failed']} failed, {t['errored']} errors"


def render_text(report: TestReport) -> str:
    lines: List[str] = [f"suite {report.suite_name}"]
    for e in report.errors:
        lines.append(f"  error: {e}")
    for w in report.warnings:
        lines.append(f"  warning: {w}")
    for case in report.cases:
        lines.append(f"{_MARK[case.status]:5} {case.name} [{case.mode}] "
                     f"({case.rules} rules, {case.answer_sets} answer sets, {case.duration_ms} ms)")
        for w in case.warnings:
            lines.append(f"      warning: {w}")
        if case.setup_error:
            lines.append(f"      error: {case.setup_error}")
        for o in case.outcomes:
            line = f"      {o.status.value:5} {o.assertion}"
            if o.status is not Status.PASS:
                line += f"\n            {o.detail}"
            lines.append(line)
        if case.status is not Status.PASS and case.transcript:
            lines.append(f"      solver command: {case.transcript}")
    lines.append(summary_line(report))
    return "\n".join(lines) + "\n"


def _case_json(case: CaseReport) -> dict:
    assertions = []
    if case.setup_error is not None:
        assertions.append({"kind": "setup", "status": "error", "detail": case.setup_error, "witnesses": []})
    for o in case.outcomes:
        assertions.append({
            "kind": o.assertion.kind.value,
            "status": o.status.value,
            "detail": o.detail,
            "witnesses": list(o.witnesses),
        })
    return {
        "name": case.name,
        "mode": case.mode,
        "status": case.status.value,
        "warnings": list(case.warnings),
        "assertions": assertions,
        "stats": {"rules": case.rules, "answerSets": case.answer_sets},
        "durationMs": case.duration_ms,
    }


def report_dict(report: TestReport) -> dict:
    return {
        "suite": report.suite_name,
        "startedAt": report.started_at,
        "totals": report.totals,
        "errors": list(report.errors),
        "cases": [_case_json(c) for c in report.cases],
    }


def render_json(report: TestReport) -> str:
    return json.dumps(report_dict(report), indent=2, sort_keys=False) + "\n"


def render_junit(report: TestReport) -> str:
    t = report.totals
    suite = ET.Element("testsuite", {
        "name": report.suite_name,
        "tests": str(len(report.cases)),
        "failures": str(t["failed"]),
        "errors": str(t["errored"] + (1 if report.errors else 0)),
        "timestamp": report.started_at,
    })
    if report.errors:
        case = ET.SubElement(suite, "testcase", {"name": "<suite>", "classname": report.suite_name})
        ET.SubElement(case, "error", {"message": report.errors[0]}).text = "\n".join(report.errors)
    for c in report.cases:
        el = ET.SubElement(suite, "testcase", {
            "name": c.name, "classname": report.suite_name, "time": f"{c.duration_ms / 1000:.3f}",
        })
        if c.setup_error is not None:
            ET.SubElement(el, "error", {"message": c.setup_error}).text = c.setup_error
        for o in c.outcomes:
            if o.status is Status.PASS:
                continue
            tag = "failure" if o.status is Status.FAIL else "error"
            ET.SubElement(el, tag, {"message": o.detail, "type": o.assertion.kind.value}).text = (
                f"{o.assertion}\n{o.detail}"
            )
        if c.warnings:
            ET.SubElement(el, "system-out").text = "\n".join(f"warning: {w}" for w in c.warnings)
    ET.indent(suite)
    return ET.tostring(suite, encoding="unicode", xml_declaration=True) + "\n"


def render_report(report: TestReport, fmt: str = "text") -> str:
    if fmt == "text":
        return render_text(report)
    if fmt == "json":
        return render_json(report)
    if fmt in ("junit", "xunit"):
        return render_junit(report)
    raise ValueError(f"unknown report format {fmt!r}")


# JSON Schema of render_json output
REPORT_SCHEMA = {
    "type": "object",
    "required": ["suite", "totals", "cases"],
    "properties": {
        "suite": {"type": "string"},
        "startedAt": {"type": "string"},
        "totals": {
            "type": "object",
            "required": ["passed", "failed", "errored"],
            "properties": {k: {"type": "integer", "minimum": 0} for k in ("passed", "failed", "errored")},
            "additionalProperties": False,
        },
        "errors": {"type": "array", "items": {"type": "string"}},
        "cases": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "mode", "warnings", "assertions", "durationMs"],
                "properties": {
                    "name": {"type": "string"},
                    "mode": {"enum": ["SELECTED_RULES", "SPLIT_PROGRAM", "PROGRAM"]},
                    "status": {"enum": ["pass", "fail", "error"]},
                    "warnings": {"type": "array", "items": {"type": "string"}},
                    "assertions": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["kind", "status", "detail", "witnesses"],
                            "properties": {
                                "kind": {"type": "string"},
                                "status": {"enum": ["pass", "fail", "error"]},
                                "detail": {"type": "string"},
                                "witnesses": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                            },
                        },
                    },
                    "stats": {"type": "object"},
                    "durationMs": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}
