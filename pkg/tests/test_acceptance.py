"""Acceptance criteria, one test each.

Every test prints a PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria". Run alone with

    pytest tests/test_acceptance.py
"""

import json
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from itertools import chain, combinations

import jsonschema

from aspunit.adapters import Overrides, SolverTranscript, parse_clingo_output, parse_dlv_output
from aspunit.assertions import Status, evaluate_assertion
from aspunit.core import RuleKind
from aspunit.parser import parse_program, serialize_program
from aspunit.report import REPORT_SCHEMA, report_dict, render_report
from aspunit.runner import RunOptions, load_suite, run_suite
from aspunit.solver import ground, enumerate_answer_sets, is_answer_set, solve
from aspunit.testlang import InlineProgram, case_programs
from aspunit.units import assemble_unit, splitting_closure

from . import oracles
from .conftest import ACCEPTANCE_LINES, FIXTURES
from .programs import program_text, random_predicate_program, random_program

NODES = range(1, 8)
EDGES = [(1, 2), (2, 3), (2, 4), (1, 4), (1, 5), (4, 5), (2, 5), (4, 6), (5, 7), (3, 7)]
INTERNAL = RunOptions(Overrides(solver="internal"))
RANDOM_PROGRAMS = 250


@contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        line = f"FAIL criterion {number:2}: {title}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        raise
    line = f"PASS criterion {number:2}: {title}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "aspunit", *args], capture_output=True, text=True, cwd=FIXTURES.parent)


def _unit(suite_file, case_name):
    loaded = load_suite(str(FIXTURES / suite_file))
    case = next(c for c in loaded.suite.cases() if c.name == case_name)
    global_program, _ = case_programs(loaded.suite, case, loaded.programs)
    unit, warnings = assemble_unit(global_program, case, loaded.programs)
    return case, unit, warnings


def _in_clique(answer_set):
    return frozenset(x.atom.terms[0].value for x in answer_set if x.predicate == "inClique")


def test_golden_clique_suite(tmp_path):
    with criterion(1, "golden clique suite exits 0, best-model level-1 cost 3, under 10 s"):
        out = tmp_path / "report.json"
        started = time.monotonic()
        proc = _cli("run", "fixtures/clique.aspt", "--solver", "internal", "--format", "json", "--out", str(out))
        elapsed = time.monotonic() - started
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert elapsed < 10, elapsed
        cases = {c["name"]: c for c in json.loads(out.read_text())["cases"]}
        best = cases["maximalClique"]["assertions"][0]
        assert (best["kind"], best["status"]) == ("BestModelCost", "pass")
        _, unit, _ = _unit("clique.aspt", "maximalClique")
        assert solve(unit).best_cost.get(1) == 3


def test_constraints_on_cliques():
    with criterion(2, "constraintsOnCliques: answer sets biject with cliques, counts 1+ and exactly 5"):
        case, unit, _ = _unit("clique.aspt", "constraintsOnCliques")
        assert not unit.has_weak_constraints()
        result = solve(unit)
        found = [_in_clique(a) for a in result.answer_sets]
        expected = oracles.cliques(NODES, EDGES)
        assert len(found) == len(set(found)) == len(expected)
        assert set(found) == set(expected)
        big = {c for c in expected if len(c) >= 3}
        assert big == {frozenset(s) for s in ({1, 2, 4}, {1, 2, 5}, {1, 4, 5}, {2, 4, 5}, {1, 2, 4, 5})}
        at_least, exactly = (evaluate_assertion(a, result) for a in case.assertions)
        assert at_least.status is Status.PASS
        assert exactly.status is Status.PASS and exactly.count == 5


def test_check_node_ordering():
    with criterion(3, "checkNodeOrdering: unit is r2, r3 and graph facts; uedge(2,1) false"):
        case, unit, _ = _unit("clique.aspt", "checkNodeOrdering")
        graph, _ = parse_program((FIXTURES / "graphInstance.dl").read_text())
        named = sorted(r.name for r in unit if r.name)
        facts = {str(r) for r in unit if r.is_fact}
        assert named == ["r2", "r3"] and len(unit) == 2 + len(graph)
        assert facts == {str(r) for r in graph}
        result = solve(unit)
        assert len(result) == 1
        assert "uedge(2,1)" not in {str(x) for x in result.answer_sets[0]}
        assert evaluate_assertion(case.assertions[0], result).status is Status.PASS


def test_guess_clique():
    with criterion(4, "guessClique: unit is r1 plus 7 node facts, 128 answer sets, F = 1"):
        case, unit, _ = _unit("clique.aspt", "guessClique")
        assert sorted(str(r) for r in unit) == sorted(
            ["inClique(X) | outClique(X) :- node(X)."] + [f"node({i})." for i in NODES])
        result = solve(unit)
        assert len(result) == 128 and result.complete
        at_most, brave = (evaluate_assertion(a, result) for a in case.assertions)
        assert at_most.status is Status.PASS and at_most.count == 1
        assert brave.status is Status.PASS


def test_failing_case_fidelity():
    with criterion(5, "checkNodeOutClique fails with inClique(5) and witness {1,4,5}"):
        proc = _cli("run", "fixtures/clique_failing.aspt", "--solver", "internal")
        assert proc.returncode == 1, proc.stdout + proc.stderr
        report = run_suite(str(FIXTURES / "clique_failing.aspt"), INTERNAL)
        case = report.cases[-1]
        assert case.name == "checkNodeOutClique" and case.status is Status.FAIL
        detail = case.outcomes[0].detail
        assert "inClique(5) true" in detail
        assert "{inClique(1), inClique(4), inClique(5)}" in detail
        assert "inClique(5)" in detail and "inClique(5)" in proc.stdout


def _all_interpretations(g):
    atoms = sorted(g.herbrand_atoms, key=str)
    for chosen in chain.from_iterable(combinations(atoms, k) for k in range(len(atoms) + 1)):
        m = frozenset(chosen)
        if any(x.strongly_negated and x.complement() in m for x in m):
            continue
        yield m


def test_solver_oracle_equivalence():
    with criterion(6, f"solver equals exhaustive checking on {RANDOM_PROGRAMS} random ground programs"):
        rng = random.Random(20121205)
        discrepancies = []
        for i in range(RANDOM_PROGRAMS):
            rules = random_program(rng, max_atoms=10, max_rules=15)
            assert len({a for r in rules for part in r for a in part}) <= 10 and len(rules) <= 15
            text = program_text(rules)
            program, _ = parse_program(text)
            g = ground(program)
            enumerated = {a.literals for a in enumerate_answer_sets(g).answer_sets}
            exhaustive = {m for m in _all_interpretations(g) if is_answer_set(g, m)}
            independent = oracles.answer_sets(rules)
            as_text = {frozenset(str(x) for x in m) for m in enumerated}
            if enumerated != exhaustive or as_text != independent:
                discrepancies.append(text)
        assert discrepancies == []


def test_splitting_properties():
    with criterion(7, f"closure invariant and seed monotonicity on {RANDOM_PROGRAMS} random programs"):
        rng = random.Random(7)
        violations = []
        for _ in range(RANDOM_PROGRAMS):
            preds, text = random_predicate_program(rng, max_preds=8)
            program, _ = parse_program(text)
            small = set(rng.sample(preds, rng.randint(0, len(preds))))
            large = small | set(rng.sample(preds, rng.randint(0, len(preds))))
            c_small = splitting_closure(program, small).predicates
            c_large = splitting_closure(program, large).predicates
            closed = all(r.predicates() <= c_small for r in program if r.is_regular and r.head_predicates() & c_small)
            if not (closed and small <= c_small and c_small <= c_large):
                violations.append(text)
        assert violations == []


def _family(result):
    best = result.optimal()
    return {frozenset(str(x) for x in a) for a in best.answer_sets}, best.best_cost


def test_adapter_fixtures():
    with criterion(8, "recorded DLV and clingo transcripts reproduce the internal answer-set families"):
        paths = sorted((FIXTURES / "transcripts").glob("*.json"))
        assert len(paths) == 2 * len(list((FIXTURES / "programs").glob("*.dl")))
        for path in paths:
            data = json.loads(path.read_text())
            program, _ = parse_program((FIXTURES / "programs" / data["program"]).read_text())
            transcript = SolverTranscript.from_json(data)
            if path.name.endswith(".dlv.json"):
                parsed = parse_dlv_output(transcript)
            else:
                parsed = parse_clingo_output(transcript, data["levels"])
            assert parsed.complete, path.name
            assert _family(parsed) == _family(solve(program)), path.name


def _corpus():
    for path in sorted(FIXTURES.rglob("*.dl")):
        yield str(path.relative_to(FIXTURES)), path.read_text()
    for suite_path in sorted(FIXTURES.glob("*.aspt")):
        loaded = load_suite(str(suite_path))
        specs = list(loaded.suite.global_inputs)
        for case in loaded.suite.test_cases:
            specs += list(case.local_inputs) + list(case.exclusions)
            for a in case.assertions:
                if a.constraint is not None:
                    yield f"{suite_path.name}:{case.name}", a.text
        for spec in specs:
            if isinstance(spec, InlineProgram):
                yield suite_path.name, spec.text


def test_parser_round_trip():
    with criterion(9, "parse, serialize, parse is a structural fixpoint on the fixture corpus"):
        diffs = []
        sources = list(_corpus())
        assert len(sources) >= 15
        weak_seen = 0
        for name, text in sources:
            first, _ = parse_program(text)
            second, _ = parse_program(serialize_program(first))
            same = first == second and [
                (r.name, r.kind, r.weight, r.level) for r in first] == [(r.name, r.kind, r.weight, r.level) for r in second]
            if not same or serialize_program(second) != serialize_program(first):
                diffs.append(name)
            weak_seen += sum(r.kind is RuleKind.WEAK for r in first)
        assert diffs == []
        assert weak_seen >= 4


MATRIX = {
    0: 'invocation("S"); input("a. b :- a."); t() { assertTrue("b."); } u() { assertBravelyTrue("a."); }',
    1: 'invocation("S"); input("a."); t() { assertTrue("a."); } u() { assertFalse("a."); }',
    2: 'invocation("S"); input("a."); t() { assertFalse("a."); } u() { assertBestModelCost(1); }',
}


def test_exit_codes_and_reports(tmp_path):
    with criterion(10, "exit codes 0/1/2, schema-valid json, deterministic json across runs"):
        for expected, text in MATRIX.items():
            suite = tmp_path / f"s{expected}.aspt"
            suite.write_text(text)
            proc = _cli("run", str(suite), "--format", "json")
            assert proc.returncode == expected, proc.stdout + proc.stderr
            jsonschema.validate(json.loads(proc.stdout), REPORT_SCHEMA)
        missing = tmp_path / "missing.aspt"
        missing.write_text('invocation("S"); inputFile("nope.dl"); t() { assertTrue("a."); }')
        assert _cli("run", str(missing)).returncode == 2

        def stable(text):
            data = json.loads(text)
            data.pop("startedAt")
            for case in data["cases"]:
                case.pop("durationMs")
            return json.dumps(data, indent=2).encode()

        runs = [render_report(run_suite(str(FIXTURES / "clique_failing.aspt"), INTERNAL), "json") for _ in range(2)]
        jsonschema.validate(json.loads(runs[0]), REPORT_SCHEMA)
        assert stable(runs[0]) == stable(runs[1])
        assert report_dict(run_suite(str(FIXTURES / "clique_failing.aspt"), INTERNAL))["totals"] == {
            "passed": 4, "failed": 1, "errored": 0}


if __name__ == "__main__":
    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
