import json
import os
import stat
import sys

import pytest

from aspunit.adapters import (
    ConfigurationError,
    OutputFormatError,
    Overrides,
    RunConfiguration,
    SolverError,
    SolverKind,
    SolverNotFound,
    SolverTimeout,
    SolverTranscript,
    internal_max_models,
    invoke_solver,
    load_configurations,
    parse_clingo_output,
    parse_dlv_output,
    resolve_configuration,
    run_external,
    solver_command,
)
from aspunit.core import CostVector

from .conftest import FIXTURES


def _t(stdout, max_models=0):
    return SolverTranscript("test", 0, stdout, max_models=max_models)


def _strs(result):
    return [sorted(str(x) for x in a) for a in result.answer_sets]


def test_dlv_models():
    r = parse_dlv_output(_t("DLV [build BEN/Dec 17 2012   gcc 4.6.1]\n\n{a, b}\n{b}\n"))
    assert _strs(r) == [["a", "b"], ["b"]] and r.complete and not r.has_costs


def test_dlv_best_model_both_cost_spellings():
    for cost in ("<3:1>", "<[3:1]>"):
        r = parse_dlv_output(_t(f"Best model: {{inClique(1), -p(2)}}\nCost ([Weight:Level]): {cost}\n"))
        assert r.best_cost == CostVector.of({1: 3})
        assert _strs(r) == [["-p(2)", "inClique(1)"]]


def test_dlv_empty_and_cap():
    r = parse_dlv_output(_t(""))
    assert len(r) == 0 and r.complete
    assert not parse_dlv_output(_t("{a}\n{b}\n", max_models=2)).complete


@pytest.mark.parametrize("stdout", ["{a, b\n", "Cost ([Weight:Level]): <[1:1]>\n", "garbage\n", "{p(X)}\n"])
def test_dlv_malformed(stdout):
    with pytest.raises(OutputFormatError):
        parse_dlv_output(_t(stdout))


def test_clingo_answers_and_costs():
    r = parse_clingo_output(_t("Answer: 1\na b\nSATISFIABLE\n"))
    assert _strs(r) == [["a", "b"]]
    r = parse_clingo_output(_t("UNSATISFIABLE\n"))
    assert len(r) == 0 and r.complete
    r = parse_clingo_output(_t("Answer: 1\ninClique(1)\nOptimization: 3\nOPTIMUM FOUND\n"))
    assert r.best_cost == CostVector.of({1: 3})


def test_clingo_empty_model_line_and_priorities():
    r = parse_clingo_output(_t("Answer: 1\n\nOptimization: 1 2\nOPTIMUM FOUND\n"))
    assert _strs(r) == [[]]
    assert r.best_cost == CostVector.of({2: 1, 1: 2})
    r = parse_clingo_output(_t("Answer: 1\na\nOptimization: 4 5\nOPTIMUM FOUND\n"), levels=[1, 7])
    assert r.best_cost == CostVector.of({7: 4, 1: 5})


def test_clingo_truncation():
    out = "Answer: 1\na\nSATISFIABLE\n\nModels       : 1+\n"
    assert not parse_clingo_output(_t(out)).complete
    assert not parse_clingo_output(_t("Answer: 1\na\nUNKNOWN\n")).complete


@pytest.mark.parametrize("stdout", ["Answer: 1\na\n", "Answer: 1\np(X)\nSATISFIABLE\n"])
def test_clingo_malformed(stdout):
    with pytest.raises(OutputFormatError):
        parse_clingo_output(_t(stdout))


def test_configuration_file(tmp_path):
    path = tmp_path / "aspunit.config.json"
    path.write_text(json.dumps({"configurations": [
        {"name": "MaximalClique", "kind": "clingo", "path": "/opt/clingo", "options": "-t 2",
         "maxModels": 5, "timeoutSeconds": 9},
    ]}))
    cfg = load_configurations(path)["MaximalClique"]
    assert (cfg.kind, cfg.solver_path, cfg.options, cfg.max_models, cfg.timeout_seconds) == (
        SolverKind.CLINGO, "/opt/clingo", "-t 2", 5, 9)
    path.write_text(json.dumps({"configurations": [{"name": "a", "kind": "dlv"}]}))
    with pytest.raises(ConfigurationError):
        load_configurations(path)


ENTRY = {"MaximalClique": RunConfiguration("MaximalClique", SolverKind.CLINGO, "/cfg/clingo", "--cfg", 7, 11)}


@pytest.mark.parametrize(
    "suite_path, suite_opts, configs, overrides, new_options, expected",
    [
        (None, None, {}, Overrides(), None, (SolverKind.INTERNAL, None, "", 0, 60)),
        (None, None, ENTRY, Overrides(), None, (SolverKind.CLINGO, "/cfg/clingo", "--cfg", 7, 11)),
        ("/usr/bin/dlv", "", ENTRY, Overrides(), None, (SolverKind.DLV, "/usr/bin/dlv", "", 7, 11)),
        ("/usr/bin/dlv", "", {}, Overrides(), "-n 0", (SolverKind.DLV, "/usr/bin/dlv", "-n 0", 0, 60)),
        ("/usr/bin/dlv", "", {}, Overrides(solver="internal"), None, (SolverKind.INTERNAL, None, "", 0, 60)),
        ("/usr/bin/dlv", "", {}, Overrides(options="-x", max_models=3, timeout=2), "-n 0",
         (SolverKind.DLV, "/usr/bin/dlv", "-x", 3, 2)),
        (None, None, {}, Overrides(solver_path="/bin/clasp"), None, (SolverKind.CLINGO, "/bin/clasp", "", 0, 60)),
    ],
)
def test_precedence_chain(suite_path, suite_opts, configs, overrides, new_options, expected):
    cfg = resolve_configuration("MaximalClique", suite_path, suite_opts, configs, overrides, new_options)
    assert (cfg.kind, cfg.solver_path, cfg.options, cfg.max_models, cfg.timeout_seconds) == expected


def test_missing_path_for_external_kind():
    with pytest.raises(ConfigurationError, match="MaximalClique"):
        resolve_configuration("MaximalClique", overrides=Overrides(solver="dlv"))


def test_internal_model_cap_from_options():
    base = RunConfiguration(max_models=4)
    assert internal_max_models(base) == 4
    assert internal_max_models(RunConfiguration(options="-n=2")) == 2
    assert internal_max_models(RunConfiguration(options="-n 0")) == 0
    assert internal_max_models(RunConfiguration(options="--models 9 --other")) == 9


def test_command_flags():
    dlv = RunConfiguration("x", SolverKind.DLV, "/usr/bin/dlv", "-silent", 3)
    assert solver_command(dlv, "p.dl") == ["/usr/bin/dlv", "-silent", "-n=3", "p.dl"]
    assert solver_command(RunConfiguration("x", SolverKind.DLV, "dlv"), "p.dl") == ["dlv", "p.dl"]
    clingo = RunConfiguration("x", SolverKind.CLINGO, "clingo")
    assert solver_command(clingo, "p.lp", optimize=True) == ["clingo", "--opt-mode=optN", "0", "p.lp"]


def _stub(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(f"#!{sys.executable}\n{body}")
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


def test_invoke_stub_dlv(tmp_path):
    stub = _stub(tmp_path, "dlv", "import sys\nassert open(sys.argv[-1]).read() == 'a | b.\\n'\nprint('{a}')\nprint('{b}')\n")
    cfg = RunConfiguration("x", SolverKind.DLV, stub)
    result, transcript = run_external(cfg, "a | b.\n")
    assert _strs(result) == [["a"], ["b"]]
    assert transcript.exit_code == 0 and transcript.program_path is None


def test_missing_binary(tmp_path):
    cfg = RunConfiguration("x", SolverKind.DLV, str(tmp_path / "no-such-dlv"))
    with pytest.raises(SolverNotFound, match="not found"):
        invoke_solver(cfg, "a.")


def test_timeout_keeps_program(tmp_path):
    stub = _stub(tmp_path, "sleepy", "import time\ntime.sleep(30)\n")
    cfg = RunConfiguration("x", SolverKind.DLV, stub, timeout_seconds=1)
    with pytest.raises(SolverTimeout) as info:
        invoke_solver(cfg, "a.")
    kept = info.value.transcript.program_path
    assert os.path.exists(kept)
    os.unlink(kept)


def test_failing_solver_reports_stderr(tmp_path):
    stub = _stub(tmp_path, "broken", "import sys\nsys.stderr.write('parse error line 1')\nsys.exit(1)\n")
    cfg = RunConfiguration("x", SolverKind.CLINGO, stub)
    with pytest.raises(SolverError, match="parse error line 1") as info:
        run_external(cfg, "a.")
    os.unlink(info.value.transcript.program_path)


def test_transcript_json_round_trip():
    t = SolverTranscript("dlv p.dl", 0, "{a}\n", "", 0.5, 3)
    assert SolverTranscript.from_json(t.to_json()) == t


def test_every_recorded_transcript_parses():
    paths = sorted((FIXTURES / "transcripts").glob("*.json"))
    assert len(paths) >= 20
    for path in paths:
        data = json.loads(path.read_text())
        t = SolverTranscript.from_json(data)
        if path.name.endswith(".dlv.json"):
            parse_dlv_output(t)
        else:
            parse_clingo_output(t, data["levels"])
