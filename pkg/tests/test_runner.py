import json
import shutil
import stat
import sys
import xml.etree.ElementTree as ET

import jsonschema
import pytest

from aspunit.adapters import Overrides
from aspunit.cli import main
from aspunit.report import REPORT_SCHEMA, render_report, report_dict, summary_line
from aspunit.runner import RunOptions, check_suite, run_suite

from .conftest import FIXTURES

INTERNAL = RunOptions(Overrides(solver="internal"))


def _write(tmp_path, text, name="s.aspt"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.fixture(scope="module")
def clique_report():
    return run_suite(str(FIXTURES / "clique.aspt"), INTERNAL)


@pytest.fixture(scope="module")
def failing_report():
    return run_suite(str(FIXTURES / "clique_failing.aspt"), INTERNAL)


def test_clique_suite_passes(clique_report):
    assert clique_report.exit_code == 0
    assert [c.name for c in clique_report.cases] == [
        "maximalClique", "constraintsOnCliques", "checkNodeOrdering", "guessClique"]
    assert summary_line(clique_report) == "4 passed, 0 failed, 0 errors"
    assert render_report(clique_report).endswith("4 passed, 0 failed, 0 errors\n")


def test_failing_case_report(failing_report):
    assert failing_report.exit_code == 1
    case = failing_report.cases[-1]
    assert case.name == "checkNodeOutClique" and case.status.value == "fail"
    detail = case.outcomes[0].detail
    assert "inClique(5)" in detail and "{inClique(1), inClique(4), inClique(5)}" in detail


def test_junit_failure_element(failing_report):
    root = ET.fromstring(render_report(failing_report, "xunit"))
    failures = root.findall(".//failure")
    assert len(failures) == 1 and "inClique(5)" in failures[0].get("message")
    assert root.get("tests") == "5" and root.get("failures") == "1"


def test_json_schema_and_totals(failing_report):
    data = json.loads(render_report(failing_report, "json"))
    jsonschema.validate(data, REPORT_SCHEMA)
    statuses = [c["status"] for c in data["cases"]]
    assert data["totals"] == {"passed": statuses.count("pass"), "failed": statuses.count("fail"),
                              "errored": statuses.count("error")}


SUITES = {
    "pass": 'invocation("S"); input("a. b :- a."); t() { assertTrue("b."); }',
    "fail": 'invocation("S"); input("a."); t() { assertTrue("a."); } u() { assertFalse("a."); }',
    "error": 'invocation("S"); input("a."); t() { assertTrue("a."); } u() { assertBestModelCost(1); }',
    "truncated": 'invocation("S"); input("a | b."); t() { newOptions("-n=1"); assertTrueIn(1, "a."); }',
    "mixed": 'invocation("S"); input("a."); t() { assertFalse("a."); } u() { assertBestModelCost(1); }',
}


@pytest.mark.parametrize("name, code", [("pass", 0), ("fail", 1), ("error", 2), ("truncated", 2), ("mixed", 2)])
def test_exit_code_matrix(tmp_path, name, code):
    report = run_suite(_write(tmp_path, SUITES[name]), INTERNAL)
    assert report.exit_code == code
    jsonschema.validate(report_dict(report), REPORT_SCHEMA)


def test_missing_input_file(tmp_path):
    report = run_suite(_write(tmp_path, 'invocation("S"); inputFile("gone.dl"); t() { assertTrue("a."); }'), INTERNAL)
    assert report.exit_code == 2
    assert "gone.dl" in report.errors[0]
    jsonschema.validate(report_dict(report), REPORT_SCHEMA)


def test_broken_case_does_not_abort_siblings(tmp_path):
    text = ('invocation("S"); input("a."); bad(SELECTED_RULES) { selectRule("zzz"); assertTrue("a."); }\n'
            'good() { assertTrue("a."); }')
    report = run_suite(_write(tmp_path, text), INTERNAL)
    assert [c.status.value for c in report.cases] == ["error", "pass"]
    assert "unknown rule name zzz" in report.cases[0].setup_error
    assert report_dict(report)["cases"][0]["assertions"][0]["kind"] == "setup"


def test_global_assertions_run_last(tmp_path):
    text = 'invocation("S"); input("a."); t() { input("b."); assertTrue("b."); } assertFalse("b.");'
    report = run_suite(_write(tmp_path, text), INTERNAL)
    assert [c.name for c in report.cases] == ["t", "__global__"] and report.exit_code == 0


def test_report_order_is_suite_order_with_many_jobs(tmp_path):
    cases = "".join(f'c{i}() {{ assertTrue("a."); }}\n' for i in range(12))
    report = run_suite(_write(tmp_path, f'invocation("S"); input("a.");\n{cases}'),
                       RunOptions(Overrides(solver="internal"), jobs=8))
    assert [c.name for c in report.cases] == [f"c{i}" for i in range(12)]


def test_json_is_deterministic(tmp_path):
    def strip(text):
        data = json.loads(text)
        data.pop("startedAt")
        for c in data["cases"]:
            c.pop("durationMs")
        return json.dumps(data, indent=2)

    path = str(FIXTURES / "clique_failing.aspt")
    first = render_report(run_suite(path, INTERNAL), "json")
    second = render_report(run_suite(path, RunOptions(Overrides(solver="internal"), jobs=1)), "json")
    assert strip(first) == strip(second)


def test_base_dir(tmp_path):
    shutil.copy(FIXTURES / "graphInstance.dl", tmp_path / "g.dl")
    suite = _write(tmp_path / "..", 'invocation("S"); inputFile("g.dl"); t() { assertTrue("node(1)."); }',
                   f"{tmp_path.name}-suite.aspt")
    report = run_suite(suite, RunOptions(Overrides(solver="internal"), base_dir=str(tmp_path)))
    assert report.exit_code == 0


def test_external_stub_solver(tmp_path):
    stub = tmp_path / "fake-dlv"
    stub.write_text(f"#!{sys.executable}\nprint('DLV [build x]')\nprint('{{a}}')\nprint('{{b}}')\n")
    stub.chmod(stub.stat().st_mode | stat.S_IEXEC)
    text = f'invocation("S", "{stub}", ""); input("a | b."); t() {{ assertTrueIn(1, "a."); assertBravelyTrue("b."); }}'
    report = run_suite(_write(tmp_path, text))
    assert report.exit_code == 0 and report.cases[0].solver == "dlv"


def test_external_solver_missing_is_error(tmp_path):
    text = 'invocation("S", "/nonexistent/dlv", ""); input("a."); t() { assertTrue("a."); }'
    report = run_suite(_write(tmp_path, text))
    assert report.exit_code == 2 and "not found" in report.cases[0].setup_error


def test_config_file_in_working_directory(tmp_path, monkeypatch):
    (tmp_path / "aspunit.config.json").write_text(json.dumps({"configurations": [
        {"name": "S", "kind": "dlv", "path": "/nonexistent/dlv"}]}))
    monkeypatch.chdir(tmp_path)
    text = 'invocation("S"); input("a."); t() { assertTrue("a."); }'
    assert run_suite(_write(tmp_path, text)).exit_code == 2
    assert run_suite(_write(tmp_path, text), INTERNAL).exit_code == 0


def test_check_verb():
    diagnostics, code = check_suite(str(FIXTURES / "clique.aspt"))
    assert code == 0 and not any(d.is_error for d in diagnostics)
    diagnostics, code = check_suite(str(FIXTURES / "cycle.aspt"))
    assert code == 0 and "p->q->p" in str(diagnostics[0])


def test_check_unknown_rule(tmp_path):
    text = 'invocation("S"); input("a."); t(SELECTED_RULES) { selectRule("r9"); assertTrue("a."); }'
    _, code = check_suite(_write(tmp_path, text))
    assert code == 2


def test_cli_run_writes_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = main(["run", str(FIXTURES / "clique.aspt"), "--solver", "internal", "--format", "json", "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["totals"] == {"passed": 4, "failed": 0, "errored": 0}


def test_cli_check_and_solve(capsys):
    assert main(["check", str(FIXTURES / "cycle.aspt")]) == 0
    assert "warning" in capsys.readouterr().out
    assert main(["solve", str(FIXTURES / "programs" / "disjunction.dl")]) == 0
    assert capsys.readouterr().out.splitlines() == ["Answer 1: {a}", "Answer 2: {b}", "2 answer sets"]
    assert main(["solve", str(FIXTURES / "programs" / "levels.dl"), "--max-models", "1"]) == 0
    assert "(truncated)" in capsys.readouterr().out
    assert main(["solve", "/nonexistent.dl"]) == 2


def test_cli_rejects_bad_flags():
    with pytest.raises(SystemExit):
        main(["run", "x.aspt", "--format", "pdf"])
