"""Predicate dependency graphs, splitting-set closures and unit assembly."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .core import AnswerSet, CountAggregate, NafLiteral, Program, Rule, canonical_form
from .diagnostics import DiagnosticError, error
from .parser import program_from_rules
from .testlang import FilterSpec, InlineProgram, Mode, Polarity, TestCase


class UnknownRuleName(DiagnosticError):
    pass


@dataclass(frozen=True)
class PredicateGraph:
    nodes: FrozenSet[str]
    # (head predicate, body predicate, "positive" | "negative")
    edges: FrozenSet[Tuple[str, str, str]]

    def successors(self, pred: str) -> Set[str]:
        return {b for a, b, _ in self.edges if a == pred}


@dataclass(frozen=True)
class SplitClosure:
    predicates: FrozenSet[str]
    bottom: Tuple[Rule, ...] = field(default=())


def build_dependency_graph(program: Program) -> PredicateGraph:
    nodes: Set[str] = set()
    edges: Set[Tuple[str, str, str]] = set()
    for rule in program:
        nodes |= rule.predicates()
        for head in rule.head_predicates():
            for el in rule.body:
                if isinstance(el, NafLiteral):
                    sign = "negative" if el.default_negated else "positive"
                    edges.add((head, el.literal.predicate, sign))
                elif isinstance(el, CountAggregate):
                    edges.add((head, el.pattern.predicate, "positive"))
    return PredicateGraph(frozenset(nodes), frozenset(edges))


def splitting_closure(program: Program, seed: Iterable[str]) -> SplitClosure:
    """Smallest predicate set containing ``seed`` that is closed under regular rules.

    Whenever a regular rule has a head predicate in the set, every predicate
    of that rule joins the set. The bottom holds the regular rules (facts
    included) whose head predicates all lie in the set; constraints and weak
    constraints never belong to it.
    """
    preds = set(seed)
    regular = [r for r in program if r.is_regular]
    changed = True
    while changed:
        changed = False
        for rule in regular:
            if rule.head_predicates() & preds:
                missing = rule.predicates() - preds
                if missing:
                    preds |= missing
                    changed = True
    bottom = tuple(r for r in regular if r.head_predicates() <= preds)
    return SplitClosure(frozenset(preds), bottom)


def _path(graph: PredicateGraph, start: str, goal: str) -> Optional[List[str]]:
    """Shortest path of at least one edge from start to goal, or None."""
    queue = deque([start, nxt] for nxt in sorted(graph.successors(start)))
    seen: Set[str] = set()
    while queue:
        path = queue.popleft()
        node = path[-1]
        if node == goal:
            return path
        if node in seen:
            continue
        seen.add(node)
        for nxt in sorted(graph.successors(node)):
            queue.append(path + [nxt])
    return None


def check_selection_compatibility(program: Program, selected: Sequence[Rule]) -> List[str]:
    """Warn when the selection cuts a recursion cycle of the program.

    A warning is produced when a head predicate of a selected rule lies on a
    dependency cycle through a head predicate of a regular rule left out of
    the selection.
    """
    graph = build_dependency_graph(program)
    outside: Set[str] = set()
    for rule in program:
        if rule.is_regular and rule not in selected:
            outside |= rule.head_predicates()
    warnings = []
    heads = sorted({p for r in selected for p in r.head_predicates()})
    for h in heads:
        for n in sorted(outside):
            if n == h:
                cycle = _path(graph, h, h)
            else:
                there = _path(graph, h, n)
                back = _path(graph, n, h) if there else None
                cycle = there + back[1:] if there and back else None
            if cycle:
                warnings.append(
                    f"selected rules do not form a splitting set: {h} and {n} lie on the cycle "
                    + "->".join(cycle)
                )
                break
    return warnings


def merge_programs(programs: Iterable[Program]) -> Program:
    """Concatenate programs, keeping one copy of alpha-equivalent rules."""
    index: Dict[Rule, int] = {}
    rules: List[Rule] = []
    for program in programs:
        for rule in program:
            form = canonical_form(rule)
            if form not in index:
                index[form] = len(rules)
                rules.append(rule)
            elif rules[index[form]].name is None and rule.name is not None:
                rules[index[form]] = rule
    return program_from_rules(rules)


def _exclude(program: Program, exclusions: Sequence) -> Tuple[Program, List[str]]:
    warnings = []
    rules = list(program)
    for spec in exclusions:
        before = len(rules)
        if isinstance(spec, InlineProgram):
            forms = {canonical_form(r) for r in spec.program}
            rules = [r for r in rules if canonical_form(r) not in forms]
            label = f'excludeInput("{spec.text}")'
        else:
            rules = [r for r in rules if r.origin != spec.path]
            label = f'excludeInputFile("{spec.path}")'
        if len(rules) == before:
            warnings.append(f"{label} matches no rule")
    return program_from_rules(rules), warnings


def _load(specs, files: Mapping[str, Program]) -> Program:
    parts = []
    for spec in specs:
        if isinstance(spec, InlineProgram):
            parts.append(spec.program)
        else:
            parts.append(files[spec.path])
    return merge_programs(parts)


def assemble_unit(global_program: Program, test: TestCase,
                  files: Optional[Mapping[str, Program]] = None) -> Tuple[Program, List[str]]:
    """Build the program a test case runs, plus warnings.

    ``files`` maps FileRef paths of the case's local inputs to their programs.
    """
    files = files or {}
    local = _load(test.local_inputs, files)
    warnings: List[str] = []
    both = merge_programs([global_program, local])
    missing = [n for n in test.selected_rule_names if n not in both.name_index]
    if missing:
        raise UnknownRuleName([error(f"unknown rule name {n}") for n in missing])

    global_kept, w1 = _exclude(global_program, test.exclusions)
    local_kept, w2 = _exclude(local, test.exclusions)
    # an exclusion only warns when it matched nothing on either side
    warnings += [w for w in w1 if w in w2]
    union = merge_programs([global_kept, local_kept])

    selected = []
    for name in test.selected_rule_names:
        if name in union.name_index:
            selected.append(union.name_index[name])
        else:
            warnings.append(f"selected rule {name} was removed by an exclusion")

    if test.mode is Mode.PROGRAM:
        unit = union
    elif test.mode is Mode.SELECTED_RULES:
        unit = merge_programs([program_from_rules(selected), local_kept])
    else:
        seed = set()
        for rule in selected:
            seed |= rule.predicates()
        closure = splitting_closure(union, seed)
        unit = merge_programs([program_from_rules(closure.bottom), local_kept])
    if selected:
        warnings += check_selection_compatibility(union, selected)
    return unit, warnings


def apply_filter(answer_set: AnswerSet, spec: Optional[FilterSpec], selected: Sequence[Rule] = ()) -> AnswerSet:
    """Keep only literals of the listed predicates (pfilter/nfilter also fix the sign)."""
    if spec is None:
        return answer_set
    if spec.selected_rules:
        preds = {p for r in selected for p in r.head_predicates()}
    else:
        preds = set(spec.predicates)
    kept = []
    for lit in answer_set.literals:
        if lit.predicate not in preds:
            continue
        if spec.polarity is Polarity.PFILTER and lit.strongly_negated:
            continue
        if spec.polarity is Polarity.NFILTER and not lit.strongly_negated:
            continue
        kept.append(lit)
    return AnswerSet(frozenset(kept))
