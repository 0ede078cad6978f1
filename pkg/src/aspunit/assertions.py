"""Evaluation of test assertions over a solver run."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from .core import AnswerSet, ClassicalLiteral, Rule, RuleKind, SolverResult, match_atom
from .solver import GroundingError, body_true, index_literals, instantiate
from .testlang import Assertion, Kind


class Status(Enum):
    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"


@dataclass(frozen=True)
class AssertionOutcome:
    assertion: Assertion
    status: Status
    witnesses: Tuple[int, ...] = ()
    detail: str = ""
    # number of answer sets satisfying the assertion's condition, when counted
    count: Optional[int] = field(default=None)

    def __post_init__(self):
        if self.status is not Status.PASS and not self.detail:
            raise ValueError("failing and erroneous outcomes need a detail message")


def _instances(a: AnswerSet, lit: ClassicalLiteral) -> List[ClassicalLiteral]:
    if lit.is_ground:
        return [lit] if lit in a else []
    return [f for f in a.sorted() if match_atom(lit, f) is not None]


def holds_true(a: AnswerSet, atoms: Sequence[ClassicalLiteral]) -> bool:
    """Every literal has a true instance in ``a``; variables are not shared across literals."""
    return all(_instances(a, lit) for lit in atoms)


def holds_false(a: AnswerSet, atoms: Sequence[ClassicalLiteral]) -> bool:
    """No literal has a true instance in ``a``."""
    return not any(_instances(a, lit) for lit in atoms)


def violations(a: AnswerSet, c: Rule) -> List[Rule]:
    """Ground instances of constraint ``c`` whose body holds in ``a``."""
    if c.kind is not RuleKind.CONSTRAINT:
        raise ValueError(f"not a constraint: {c}")
    interp = a.literals
    try:
        return [g for g in instantiate(c, index_literals(a.sorted())) if body_true(g, interp)]
    except GroundingError as exc:
        raise ValueError(str(exc)) from None


def satisfies_constraint(a: AnswerSet, c: Rule) -> bool:
    return not violations(a, c)


_TRUE = {Kind.TRUE_ALL, Kind.TRUE_BRAVE, Kind.TRUE_IN, Kind.TRUE_IN_AT_LEAST, Kind.TRUE_IN_AT_MOST}
_FALSE = {Kind.FALSE_ALL, Kind.FALSE_BRAVE, Kind.FALSE_IN, Kind.FALSE_IN_AT_LEAST, Kind.FALSE_IN_AT_MOST}
_ALL = {Kind.TRUE_ALL, Kind.FALSE_ALL, Kind.CONSTRAINT_ALL}
_BRAVE = {Kind.TRUE_BRAVE, Kind.FALSE_BRAVE}
_EXACT = {Kind.TRUE_IN, Kind.FALSE_IN, Kind.CONSTRAINT_IN}
_AT_LEAST = {Kind.TRUE_IN_AT_LEAST, Kind.FALSE_IN_AT_LEAST, Kind.CONSTRAINT_IN_AT_LEAST}
_AT_MOST = {Kind.TRUE_IN_AT_MOST, Kind.FALSE_IN_AT_MOST, Kind.CONSTRAINT_IN_AT_MOST}


def _show(a: AnswerSet, predicates) -> str:
    return str(a.restrict(predicates))


def _explain(assertion: Assertion, a: AnswerSet, index: int) -> str:
    """Why answer set ``index`` does not satisfy the assertion's condition."""
    kind = assertion.kind
    if kind in _TRUE:
        missing = [str(lit) for lit in assertion.atoms if not _instances(a, lit)]
        preds = sorted({lit.predicate for lit in assertion.atoms})
        return f"answer set #{index}: {', '.join(missing)} not true; model {_show(a, preds)}"
    if kind in _FALSE:
        true = [str(f) for lit in assertion.atoms for f in _instances(a, lit)]
        preds = sorted({lit.predicate for lit in assertion.atoms})
        return f"answer set #{index}: {', '.join(dict.fromkeys(true))} true; model {_show(a, preds)}"
    broken = violations(a, assertion.constraint)
    return f"answer set #{index}: violates {assertion.text} via {broken[0]}"


def evaluate_assertion(assertion: Assertion, result: SolverResult,
                       filtered_sets: Optional[Sequence[AnswerSet]] = None) -> AssertionOutcome:
    """Decide one assertion. Problems are reported as outcomes, never raised."""
    sets = list(result.answer_sets if filtered_sets is None else filtered_sets)
    kind = assertion.kind

    if kind is Kind.BEST_MODEL_COST:
        best = result.best_cost
        if best is None:
            return AssertionOutcome(assertion, Status.ERROR, detail="no weak constraints in run")
        if not result.complete:
            return AssertionOutcome(assertion, Status.ERROR, detail="enumeration truncated; best cost unknown")
        observed = best.get(assertion.level)
        witnesses = tuple(i for i, c in enumerate(result.cost_vectors) if c == best)
        if observed == assertion.cost:
            return AssertionOutcome(assertion, Status.PASS, witnesses,
                                    f"best model cost {observed} at level {assertion.level}", observed)
        return AssertionOutcome(
            assertion, Status.FAIL, witnesses,
            f"best model cost at level {assertion.level} is {observed}, expected {assertion.cost}",
            observed,
        )

    try:
        if kind in _TRUE:
            good = [holds_true(a, assertion.atoms) for a in sets]
        elif kind in _FALSE:
            good = [holds_false(a, assertion.atoms) for a in sets]
        else:
            good = [satisfies_constraint(a, assertion.constraint) for a in sets]
    except ValueError as exc:
        return AssertionOutcome(assertion, Status.ERROR, detail=str(exc))

    n_sets = len(sets)
    hits = tuple(i for i, ok in enumerate(good) if ok)
    misses = tuple(i for i, ok in enumerate(good) if not ok)
    count = len(hits)

    if kind in _ALL:
        passed, expected = count == n_sets, "all"
        # a counterexample stays a counterexample; a pass may not survive more models
        certain = not passed or result.complete
    elif kind in _BRAVE:
        passed, expected = count >= 1, "at least 1"
        certain = passed or result.complete
    elif kind in _EXACT:
        passed, expected = count == assertion.count, f"exactly {assertion.count}"
        certain = result.complete
    elif kind in _AT_LEAST:
        passed, expected = count >= assertion.count, f"at least {assertion.count}"
        certain = passed or result.complete
    else:
        passed, expected = count <= assertion.count, f"at most {assertion.count}"
        certain = not passed or result.complete

    summary = f"{count} of {n_sets} answer sets satisfy {assertion.statement} ({expected} required)"
    if not certain:
        return AssertionOutcome(assertion, Status.ERROR, hits,
                                f"enumeration truncated; {summary}", count)
    if passed:
        note = " (vacuously: no answer sets)" if n_sets == 0 and kind in _ALL else ""
        return AssertionOutcome(assertion, Status.PASS, hits, summary + note, count)

    if n_sets == 0:
        return AssertionOutcome(assertion, Status.FAIL, (), summary + "; the program has no answer sets", count)
    # too few satisfying sets: show sets that fail the condition; too many: show the satisfying ones
    too_many = kind in _AT_MOST or (kind in _EXACT and count > assertion.count)
    witnesses = hits if too_many else misses
    if too_many:
        shown = "; ".join(f"answer set #{i} {_show(sets[i], _predicates(assertion))}" for i in witnesses[:3])
    else:
        shown = "; ".join(_explain(assertion, sets[i], i) for i in witnesses[:3])
    more = f" (and {len(witnesses) - 3} more)" if len(witnesses) > 3 else ""
    return AssertionOutcome(assertion, Status.FAIL, witnesses, f"{summary}; {shown}{more}", count)


def _predicates(assertion: Assertion) -> List[str]:
    if assertion.constraint is not None:
        return sorted(assertion.constraint.predicates())
    return sorted({lit.predicate for lit in assertion.atoms})
