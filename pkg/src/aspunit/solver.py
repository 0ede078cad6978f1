"""A small reference solver: grounding, stable-model checking and enumeration.

The solver is meant for desk-scale programs and as an oracle for the
external solver adapters. Answer sets are checked against the definition:
a candidate is an answer set iff it is a minimal model of the program's
reduct with respect to the candidate itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Sequence, Set, Tuple

from .core import (
    AnswerSet,
    ClassicalLiteral,
    Comparison,
    Constant,
    CostVector,
    CountAggregate,
    IntConstant,
    NafLiteral,
    Program,
    Rule,
    RuleKind,
    SolverResult,
    Variable,
    apply_substitution,
    compare_terms,
    literal_key,
    match_atom,
)

DEFAULT_MAX_FREE_ATOMS = 24


class GroundingError(ValueError):
    pass


class SolverCapacityError(RuntimeError):
    """The program is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class GroundCount:
    """A ``#count`` aggregate with its possible elements spelled out."""

    elements: Tuple[Tuple[Tuple[Constant, ...], ClassicalLiteral], ...]
    op: str
    guard: Constant

    def count(self, interpretation) -> int:
        return len({key for key, lit in self.elements if lit in interpretation})

    def holds(self, interpretation) -> bool:
        return compare_terms(IntConstant(self.count(interpretation)), self.op, self.guard)

    def literals(self) -> Iterator[ClassicalLiteral]:
        for _, lit in self.elements:
            yield lit

    def variables(self):
        return iter(())

    def __str__(self):
        elems = "; ".join(f"{','.join(map(str, k))}: {lit}" for k, lit in self.elements)
        return f"#count{{{elems}}} {self.op} {self.guard}"


@dataclass(frozen=True)
class GroundProgram:
    rules: Tuple[Rule, ...]
    herbrand_atoms: FrozenSet[ClassicalLiteral]

    def regular(self) -> List[Rule]:
        return [r for r in self.rules if r.kind is RuleKind.REGULAR]

    def constraints(self) -> List[Rule]:
        return [r for r in self.rules if r.kind is RuleKind.CONSTRAINT]

    def weak_constraints(self) -> List[Rule]:
        return [r for r in self.rules if r.kind is RuleKind.WEAK]


# ---------------------------------------------------------------------------
# Instantiation

_Index = Dict[Tuple[str, bool, int], List[ClassicalLiteral]]


def index_literals(literals: Iterable[ClassicalLiteral]) -> _Index:
    index: _Index = {}
    for lit in literals:
        index.setdefault((lit.predicate, lit.strongly_negated, lit.arity), []).append(lit)
    return index


def _join(positive: Sequence[ClassicalLiteral], index: _Index, sigma: Dict) -> Iterator[Dict]:
    if not positive:
        yield sigma
        return
    first, rest = positive[0], positive[1:]
    for fact in index.get((first.predicate, first.strongly_negated, first.arity), ()):
        extended = match_atom(first, fact, sigma)
        if extended is not None:
            yield from _join(rest, index, extended)


def _check_bound(rule: Rule, sigma: Mapping) -> None:
    for v in rule.variables():
        if v not in sigma and not _aggregate_local(rule, v):
            raise GroundingError(f"unsafe variable {v} in rule '{rule}'")


def _aggregate_local(rule: Rule, v: Variable) -> bool:
    return any(
        isinstance(el, CountAggregate) and v in set(el.bound_vars) | set(el.pattern.variables())
        for el in rule.body
    )


def _ground_count(agg: CountAggregate, index: _Index) -> GroundCount:
    elements = []
    for fact in index.get((agg.pattern.predicate, agg.pattern.strongly_negated, agg.pattern.arity), ()):
        binding = match_atom(agg.pattern, fact)
        if binding is None:
            continue
        key = tuple(binding[v] for v in agg.bound_vars)
        elements.append((key, fact))
    elements.sort(key=lambda e: literal_key(e[1]))
    if isinstance(agg.guard, Variable):
        raise GroundingError(f"unbound aggregate guard {agg.guard}")
    return GroundCount(tuple(elements), agg.op, agg.guard)


def instantiate(rule: Rule, index: _Index) -> Iterator[Rule]:
    """Ground instances of ``rule`` whose positive body literals are in ``index``.

    Comparisons are decided here and removed from the body; ``#count``
    aggregates become GroundCount elements drawn from ``index``.
    """
    positive = list(rule.positive_body())
    for sigma in _join(positive, index, {}):
        _check_bound(rule, sigma)
        body = []
        ok = True
        for el in rule.body:
            if isinstance(el, Comparison):
                left = apply_substitution(el.left, sigma)
                right = apply_substitution(el.right, sigma)
                if not compare_terms(left, el.op, right):
                    ok = False
                    break
            elif isinstance(el, CountAggregate):
                body.append(_ground_count(apply_substitution(el, sigma), index))
            else:
                body.append(apply_substitution(el, sigma))
        if ok:
            yield Rule(
                tuple(apply_substitution(h, sigma) for h in rule.head),
                tuple(body),
                rule.kind,
                rule.weight,
                rule.level,
                rule.name,
                rule.origin,
                rule.ordinal,
            )


def _constants(program: Program) -> bool:
    for rule in program:
        for lit in rule.head:
            if lit.is_ground and lit.arity:
                return True
        for el in rule.body:
            terms = []
            if isinstance(el, NafLiteral):
                terms = el.literal.atom.terms
            elif isinstance(el, Comparison):
                terms = (el.left, el.right)
            elif isinstance(el, CountAggregate):
                terms = el.pattern.atom.terms + (el.guard,)
            if any(not isinstance(t, Variable) for t in terms):
                return True
    return False


def ground(program: Program) -> GroundProgram:
    """Instantiate ``program`` over the atoms its regular rules can possibly derive."""
    if any(not r.is_ground for r in program) and not _constants(program):
        raise GroundingError("program has variables but no constants (empty Herbrand universe)")
    regular = [r for r in program if r.is_regular]
    possible: Set[ClassicalLiteral] = set()
    while True:
        index = index_literals(possible)
        new = set()
        for rule in regular:
            for inst in instantiate(rule, index):
                for h in inst.head:
                    if h not in possible:
                        new.add(h)
        if not new:
            break
        possible |= new
    index = index_literals(sorted(possible, key=literal_key))
    rules: Dict[Rule, None] = {}
    for rule in program:
        for inst in instantiate(rule, index):
            rules.setdefault(inst, None)
    atoms: Set[ClassicalLiteral] = set()
    for r in rules:
        atoms.update(r.head)
        for el in r.body:
            if isinstance(el, NafLiteral):
                atoms.add(el.literal)
            elif isinstance(el, GroundCount):
                atoms.update(el.literals())
    return GroundProgram(tuple(rules), frozenset(atoms))


# ---------------------------------------------------------------------------
# Stable-model check


def body_true(rule: Rule, interpretation) -> bool:
    for el in rule.body:
        if isinstance(el, NafLiteral):
            if (el.literal in interpretation) == el.default_negated:
                return False
        elif isinstance(el, GroundCount):
            if not el.holds(interpretation):
                return False
        else:
            raise TypeError(f"non-ground body element {el}")
    return True


def _sat(clauses: List[Tuple[FrozenSet[int], FrozenSet[int]]], assignment: Dict[int, bool]) -> bool:
    """Tiny DPLL; a clause (pos, neg) holds when some pos var is true or some neg var false."""
    while True:
        unit = None
        for pos, neg in clauses:
            if any(assignment.get(v) is True for v in pos) or any(assignment.get(v) is False for v in neg):
                continue
            open_pos = [v for v in pos if v not in assignment]
            open_neg = [v for v in neg if v not in assignment]
            if not open_pos and not open_neg:
                return False
            if len(open_pos) + len(open_neg) == 1:
                unit = (open_pos[0], True) if open_pos else (open_neg[0], False)
                break
        if unit is None:
            break
        assignment = {**assignment, unit[0]: unit[1]}
    free = {v for pos, neg in clauses for v in pos | neg if v not in assignment}
    if not free:
        return True
    v = min(free)
    return _sat(clauses, {**assignment, v: False}) or _sat(clauses, {**assignment, v: True})


def _is_minimal_model(reduct: Sequence[Rule], interpretation: FrozenSet[ClassicalLiteral]) -> bool:
    """No strict subset of ``interpretation`` is a model of the positive program ``reduct``."""
    restricted = []
    for r in reduct:
        pos = list(r.positive_body())
        if all(p in interpretation for p in pos):
            restricted.append((pos, [h for h in r.head if h in interpretation]))
    if all(len(heads) <= 1 for _, heads in restricted):
        # Horn case: compare with the least model
        derived: Set[ClassicalLiteral] = set()
        changed = True
        while changed:
            changed = False
            for pos, heads in restricted:
                if heads and heads[0] not in derived and all(p in derived for p in pos):
                    derived.add(heads[0])
                    changed = True
        return derived == set(interpretation)
    atoms = sorted(interpretation, key=literal_key)
    ids = {a: i for i, a in enumerate(atoms)}
    clauses = [
        (frozenset(ids[h] for h in heads), frozenset(ids[p] for p in pos))
        for pos, heads in restricted
    ]
    clauses.append((frozenset(), frozenset(ids.values())))
    return not _sat(clauses, {})


def is_answer_set(g: GroundProgram, candidate) -> bool:
    """Check ``candidate`` against the reduct definition (weak constraints ignored)."""
    if not isinstance(candidate, AnswerSet):
        candidate = AnswerSet(frozenset(candidate))
    interp = candidate.literals
    for c in g.constraints():
        if body_true(c, interp):
            return False
    reduct = []
    for r in g.regular():
        if any(n in interp for n in r.negative_body()):
            continue
        reduct.append(Rule(r.head, tuple(NafLiteral(p) for p in r.positive_body())))
    for r in reduct:
        if body_true(r, interp) and not any(h in interp for h in r.head):
            return False
    return _is_minimal_model(reduct, interp)


def cost_vector(answer_set, weak: Iterable[Rule]) -> CostVector:
    interp = answer_set.literals if isinstance(answer_set, AnswerSet) else answer_set
    totals: Dict[int, int] = {}
    for w in weak:
        if body_true(w, interp):
            totals[w.level] = totals.get(w.level, 0) + w.weight
    return CostVector.of(totals)


# ---------------------------------------------------------------------------
# Enumeration


def _rule_atoms(rule: Rule) -> Iterator[ClassicalLiteral]:
    yield from rule.head
    for el in rule.body:
        if isinstance(el, NafLiteral):
            yield el.literal
        elif isinstance(el, GroundCount):
            yield from el.literals()


def _definite_consequences(g: GroundProgram) -> Set[ClassicalLiteral]:
    """Atoms derived by single-head, negation-free rules; true in every answer set."""
    known: Set[ClassicalLiteral] = set()
    changed = True
    definite = [r for r in g.regular() if len(r.head) == 1 and not any(r.negative_body())]
    while changed:
        changed = False
        for r in definite:
            if r.head[0] not in known and all(p in known for p in r.positive_body()):
                known.add(r.head[0])
                changed = True
    return known


def _search(g: GroundProgram, max_free_atoms: int) -> Iterator[FrozenSet[ClassicalLiteral]]:
    known = _definite_consequences(g)
    heads = {h for r in g.regular() for h in r.head}
    order: Dict[ClassicalLiteral, int] = {}
    for r in g.rules:
        for lit in _rule_atoms(r):
            if lit in heads and lit not in known and lit not in order:
                order[lit] = len(order)
    free = list(order)
    if len(free) > max_free_atoms:
        raise SolverCapacityError(
            f"{len(free)} undecided atoms exceed the reference solver limit of {max_free_atoms}"
        )

    # each rule is checked as a model condition once its last free atom is assigned
    checks: Dict[int, List[Rule]] = {}
    for r in g.regular() + g.constraints():
        positions = [order[a] for a in _rule_atoms(r) if a in order]
        checks.setdefault(max(positions) if positions else -1, []).append(r)

    def violated(rule: Rule, interp: Set[ClassicalLiteral]) -> bool:
        return body_true(rule, interp) and not any(h in interp for h in rule.head)

    true: Set[ClassicalLiteral] = set(known)
    if any(violated(r, true) for r in checks.get(-1, ())):
        return

    def dfs(i: int) -> Iterator[FrozenSet[ClassicalLiteral]]:
        if i == len(free):
            candidate = frozenset(true)
            if is_answer_set(g, AnswerSet(candidate)):
                yield candidate
            return
        atom = free[i]
        for value in (False, True):
            if value:
                if atom.complement() in true:
                    continue
                true.add(atom)
            if not any(violated(r, true) for r in checks.get(i, ())):
                yield from dfs(i + 1)
            if value:
                true.discard(atom)

    for lit in known:
        if lit.strongly_negated and lit.complement() in known:
            return
    yield from dfs(0)


def enumerate_answer_sets(g: GroundProgram, max_models: int = 0,
                          max_free_atoms: int = DEFAULT_MAX_FREE_ATOMS) -> SolverResult:
    """All answer sets of ``g`` (at most ``max_models`` when positive), sorted."""
    found = []
    complete = True
    for model in _search(g, max_free_atoms):
        if max_models and len(found) == max_models:
            complete = False
            break
        found.append(AnswerSet(model))
    found.sort(key=AnswerSet.sort_key)
    weak = g.weak_constraints()
    costs = tuple(cost_vector(a, weak) for a in found) if weak else ()
    return SolverResult(tuple(found), costs, complete)


def solve(program: Program, max_models: int = 0, max_free_atoms: int = DEFAULT_MAX_FREE_ATOMS) -> SolverResult:
    return enumerate_answer_sets(ground(program), max_models, max_free_atoms)
