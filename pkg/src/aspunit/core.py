"""Abstract syntax for DLV-style ASP programs, answer sets and costs.

Every value here is immutable; programs, answer sets and solver results
can be shared freely between threads.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

VARIABLE_RE = re.compile(r"[A-Z_][A-Za-z0-9_]*\Z")
CONSTANT_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Variable:
    name: str

    def __post_init__(self):
        if not VARIABLE_RE.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class IntConstant:
    value: int

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class SymConstant:
    name: str

    def __post_init__(self):
        if not CONSTANT_RE.match(self.name):
            raise ValueError(f"invalid constant name {self.name!r}")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class StrConstant:
    value: str

    def __str__(self):
        escaped = self.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{escaped}"'


Term = Union[Variable, IntConstant, SymConstant, StrConstant]
Constant = Union[IntConstant, SymConstant, StrConstant]
Substitution = Mapping[Variable, Constant]


def is_ground_term(term: Term) -> bool:
    return not isinstance(term, Variable)


def term_key(term: Constant) -> tuple:
    """Sort key for ground terms: integers, then symbols, then strings."""
    if isinstance(term, IntConstant):
        return (0, term.value, "")
    if isinstance(term, SymConstant):
        return (1, 0, term.name)
    if isinstance(term, StrConstant):
        return (2, 0, term.value)
    raise TypeError(f"cannot order non-ground term {term}")


COMPARISON_OPS = ("<", "<=", "=", "!=", ">", ">=")


def compare_terms(left: Constant, op: str, right: Constant) -> bool:
    a, b = term_key(left), term_key(right)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(f"unknown comparison operator {op!r}")


# ---------------------------------------------------------------------------
# Atoms and literals


@dataclass(frozen=True)
class Atom:
    predicate: str
    terms: Tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.terms)

    @property
    def is_ground(self) -> bool:
        return all(is_ground_term(t) for t in self.terms)

    def variables(self) -> Iterator[Variable]:
        for t in self.terms:
            if isinstance(t, Variable):
                yield t

    def __str__(self):
        if not self.terms:
            return self.predicate
        return f"{self.predicate}({','.join(str(t) for t in self.terms)})"


@dataclass(frozen=True)
class ClassicalLiteral:
    atom: Atom
    strongly_negated: bool = False

    @property
    def predicate(self) -> str:
        return self.atom.predicate

    @property
    def arity(self) -> int:
        return self.atom.arity

    @property
    def is_ground(self) -> bool:
        return self.atom.is_ground

    def variables(self) -> Iterator[Variable]:
        return self.atom.variables()

    def complement(self) -> "ClassicalLiteral":
        return ClassicalLiteral(self.atom, not self.strongly_negated)

    def __str__(self):
        return ("-" if self.strongly_negated else "") + str(self.atom)


def literal(predicate: str, *args: Union[int, str, Term], negated: bool = False) -> ClassicalLiteral:
    """Build a literal from Python values; convenient in tests and fixtures.

    Integers become IntConstant, strings starting with an uppercase letter or
    underscore become Variable, other strings SymConstant.
    """
    terms = []
    for a in args:
        if isinstance(a, (Variable, IntConstant, SymConstant, StrConstant)):
            terms.append(a)
        elif isinstance(a, int):
            terms.append(IntConstant(a))
        elif VARIABLE_RE.match(a):
            terms.append(Variable(a))
        else:
            terms.append(SymConstant(a))
    return ClassicalLiteral(Atom(predicate, tuple(terms)), negated)


# ---------------------------------------------------------------------------
# Body elements


@dataclass(frozen=True)
class NafLiteral:
    literal: ClassicalLiteral
    default_negated: bool = False

    def variables(self) -> Iterator[Variable]:
        return self.literal.variables()

    def __str__(self):
        return ("not " if self.default_negated else "") + str(self.literal)


@dataclass(frozen=True)
class Comparison:
    left: Term
    op: str
    right: Term

    def __post_init__(self):
        if self.op not in COMPARISON_OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")

    def variables(self) -> Iterator[Variable]:
        for t in (self.left, self.right):
            if isinstance(t, Variable):
                yield t

    def __str__(self):
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class CountAggregate:
    """``#count{V1,...: pattern} op guard``; bound_vars are local to the aggregate."""

    bound_vars: Tuple[Variable, ...]
    pattern: ClassicalLiteral
    op: str
    guard: Term

    def __post_init__(self):
        if self.op not in COMPARISON_OPS:
            raise ValueError(f"unknown comparison operator {self.op!r}")

    def variables(self) -> Iterator[Variable]:
        yield from self.bound_vars
        yield from self.pattern.variables()
        if isinstance(self.guard, Variable):
            yield self.guard

    def __str__(self):
        bound = ",".join(str(v) for v in self.bound_vars)
        return f"#count{{{bound}: {self.pattern}}} {self.op} {self.guard}"


BodyElement = Union[NafLiteral, Comparison, CountAggregate]


# ---------------------------------------------------------------------------
# Rules and programs


class RuleKind(Enum):
    REGULAR = "regular"
    CONSTRAINT = "constraint"
    WEAK = "weak"


@dataclass(frozen=True)
class Rule:
    head: Tuple[ClassicalLiteral, ...] = ()
    body: Tuple[BodyElement, ...] = ()
    kind: RuleKind = RuleKind.REGULAR
    weight: int = 1
    level: int = 1
    name: Optional[str] = None
    # where the rule came from; not part of the rule's identity
    origin: str = field(default="", compare=False)
    ordinal: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.kind is not RuleKind.REGULAR and self.head:
            raise ValueError(f"{self.kind.value} rules have an empty head")
        if self.kind is RuleKind.REGULAR and not self.head:
            raise ValueError("regular rules need at least one head literal")
        if self.kind is RuleKind.WEAK and (self.weight < 1 or self.level < 1):
            raise ValueError("weak constraint weight and level must be positive")

    @property
    def is_fact(self) -> bool:
        return (
            self.kind is RuleKind.REGULAR
            and not self.body
            and len(self.head) == 1
            and self.head[0].is_ground
        )

    @property
    def is_regular(self) -> bool:
        return self.kind is RuleKind.REGULAR

    @property
    def is_ground(self) -> bool:
        return next(self.variables(), None) is None

    def variables(self) -> Iterator[Variable]:
        for lit in self.head:
            yield from lit.variables()
        for el in self.body:
            yield from el.variables()

    def positive_body(self) -> Iterator[ClassicalLiteral]:
        for el in self.body:
            if isinstance(el, NafLiteral) and not el.default_negated:
                yield el.literal

    def negative_body(self) -> Iterator[ClassicalLiteral]:
        for el in self.body:
            if isinstance(el, NafLiteral) and el.default_negated:
                yield el.literal

    def head_predicates(self) -> set:
        return {lit.predicate for lit in self.head}

    def predicates(self) -> set:
        preds = self.head_predicates()
        for el in self.body:
            if isinstance(el, NafLiteral):
                preds.add(el.literal.predicate)
            elif isinstance(el, CountAggregate):
                preds.add(el.pattern.predicate)
        return preds

    def with_origin(self, origin: str, ordinal: int) -> "Rule":
        return Rule(self.head, self.body, self.kind, self.weight, self.level, self.name, origin, ordinal)

    def renamed(self, name: Optional[str]) -> "Rule":
        return Rule(self.head, self.body, self.kind, self.weight, self.level, name, self.origin, self.ordinal)

    def __str__(self):
        body = ", ".join(str(el) for el in self.body)
        if self.kind is RuleKind.CONSTRAINT:
            return f":- {body}."
        if self.kind is RuleKind.WEAK:
            return f":~ {body}. [{self.weight}:{self.level}]"
        head = " | ".join(str(lit) for lit in self.head)
        return f"{head} :- {body}." if self.body else f"{head}."


class DuplicateRuleName(ValueError):
    pass


@dataclass(frozen=True)
class Program:
    rules: Tuple[Rule, ...] = ()
    name_index: Dict[str, Rule] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        index: Dict[str, Rule] = {}
        for rule in self.rules:
            if rule.name is None:
                continue
            if rule.name in index:
                raise DuplicateRuleName(f"duplicate rule name {rule.name}")
            index[rule.name] = rule
        object.__setattr__(self, "name_index", index)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def rule(self, name: str) -> Rule:
        return self.name_index[name]

    def predicates(self) -> set:
        preds = set()
        for r in self.rules:
            preds |= r.predicates()
        return preds

    def has_weak_constraints(self) -> bool:
        return any(r.kind is RuleKind.WEAK for r in self.rules)

    def __str__(self):
        return "\n".join(str(r) for r in self.rules)


# ---------------------------------------------------------------------------
# Answer sets and costs


class InconsistentAnswerSet(ValueError):
    pass


def literal_key(lit: ClassicalLiteral) -> str:
    return str(lit)


@dataclass(frozen=True)
class AnswerSet:
    literals: frozenset = frozenset()

    def __post_init__(self):
        lits = frozenset(self.literals)
        object.__setattr__(self, "literals", lits)
        for lit in lits:
            if not lit.is_ground:
                raise ValueError(f"answer sets contain ground literals only, got {lit}")
            if lit.strongly_negated and lit.complement() in lits:
                raise InconsistentAnswerSet(f"{lit.atom} and {lit} are both true")

    def __iter__(self) -> Iterator[ClassicalLiteral]:
        return iter(self.sorted())

    def __contains__(self, lit) -> bool:
        return lit in self.literals

    def __len__(self) -> int:
        return len(self.literals)

    def sorted(self) -> list:
        return sorted(self.literals, key=literal_key)

    def sort_key(self) -> tuple:
        return tuple(sorted(literal_key(lit) for lit in self.literals))

    def restrict(self, predicates: Iterable[str]) -> "AnswerSet":
        preds = set(predicates)
        return AnswerSet(frozenset(lit for lit in self.literals if lit.predicate in preds))

    def __str__(self):
        return "{" + ", ".join(str(lit) for lit in self.sorted()) + "}"


@functools.total_ordering
@dataclass(frozen=True)
class CostVector:
    """Weak-constraint cost per level; levels with zero cost are not stored."""

    costs: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        items = dict(self.costs)
        for level, cost in items.items():
            if level < 1 or cost < 0:
                raise ValueError(f"invalid cost {cost}@{level}")
        object.__setattr__(
            self, "costs", tuple(sorted((lv, c) for lv, c in items.items() if c != 0))
        )

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> "CostVector":
        return cls(tuple(mapping.items()))

    def get(self, level: int) -> int:
        return dict(self.costs).get(level, 0)

    def levels(self) -> list:
        return [lv for lv, _ in self.costs]

    def as_dict(self) -> Dict[int, int]:
        return dict(self.costs)

    def __lt__(self, other: "CostVector") -> bool:
        return compare_cost(self, other) < 0

    def __str__(self):
        return "<" + ",".join(f"[{c}:{lv}]" for lv, c in reversed(self.costs)) + ">"


def compare_cost(a: CostVector, b: CostVector) -> int:
    """-1 if ``a`` is better (cheaper) than ``b``, 0 if equal, 1 if worse.

    Higher levels take priority; a missing level costs 0.
    """
    da, db = a.as_dict(), b.as_dict()
    for level in sorted(set(da) | set(db), reverse=True):
        ca, cb = da.get(level, 0), db.get(level, 0)
        if ca != cb:
            return -1 if ca < cb else 1
    return 0


@dataclass(frozen=True)
class SolverResult:
    answer_sets: Tuple[AnswerSet, ...] = ()
    cost_vectors: Tuple[Optional[CostVector], ...] = ()
    complete: bool = True

    def __post_init__(self):
        object.__setattr__(self, "answer_sets", tuple(self.answer_sets))
        costs = tuple(self.cost_vectors) or (None,) * len(self.answer_sets)
        if len(costs) != len(self.answer_sets):
            raise ValueError("cost_vectors must parallel answer_sets")
        object.__setattr__(self, "cost_vectors", costs)
        if len(set(self.answer_sets)) != len(self.answer_sets):
            raise ValueError("answer sets must be pairwise distinct")

    @property
    def has_costs(self) -> bool:
        return any(c is not None for c in self.cost_vectors)

    @property
    def best_cost(self) -> Optional[CostVector]:
        present = [c for c in self.cost_vectors if c is not None]
        return min(present) if present else None

    def optimal(self) -> "SolverResult":
        """Only the answer sets of minimal cost; unchanged when no costs were reported."""
        best = self.best_cost
        if best is None:
            return self
        keep = [
            (a, c)
            for a, c in zip(self.answer_sets, self.cost_vectors)
            if c is not None and compare_cost(c, best) == 0
        ]
        return SolverResult(tuple(a for a, _ in keep), tuple(c for _, c in keep), self.complete)

    def __len__(self) -> int:
        return len(self.answer_sets)


# ---------------------------------------------------------------------------
# Matching and substitution


def match_atom(pattern: ClassicalLiteral, fact: ClassicalLiteral,
               sigma: Optional[Mapping[Variable, Constant]] = None) -> Optional[Dict[Variable, Constant]]:
    """Extend ``sigma`` so that ``pattern`` instantiates to ``fact``, or return None."""
    if (
        pattern.strongly_negated != fact.strongly_negated
        or pattern.atom.predicate != fact.atom.predicate
        or pattern.atom.arity != fact.atom.arity
    ):
        return None
    binding = dict(sigma) if sigma else {}
    for p, f in zip(pattern.atom.terms, fact.atom.terms):
        if isinstance(p, Variable):
            bound = binding.get(p)
            if bound is None:
                binding[p] = f
            elif bound != f:
                return None
        elif p != f:
            return None
    return binding


def _subst_term(t: Term, sigma: Substitution) -> Term:
    if isinstance(t, Variable):
        return sigma.get(t, t)
    return t


def apply_substitution(element, sigma: Substitution):
    """Replace variables in a term, atom, literal, body element or rule."""
    if isinstance(element, (Variable, IntConstant, SymConstant, StrConstant)):
        return _subst_term(element, sigma)
    if isinstance(element, Atom):
        return Atom(element.predicate, tuple(_subst_term(t, sigma) for t in element.terms))
    if isinstance(element, ClassicalLiteral):
        return ClassicalLiteral(apply_substitution(element.atom, sigma), element.strongly_negated)
    if isinstance(element, NafLiteral):
        return NafLiteral(apply_substitution(element.literal, sigma), element.default_negated)
    if isinstance(element, Comparison):
        return Comparison(_subst_term(element.left, sigma), element.op, _subst_term(element.right, sigma))
    if isinstance(element, CountAggregate):
        outer = {v: c for v, c in sigma.items() if v not in element.bound_vars}
        return CountAggregate(
            element.bound_vars,
            apply_substitution(element.pattern, outer),
            element.op,
            _subst_term(element.guard, outer),
        )
    if isinstance(element, Rule):
        return Rule(
            tuple(apply_substitution(h, sigma) for h in element.head),
            tuple(apply_substitution(b, sigma) for b in element.body),
            element.kind,
            element.weight,
            element.level,
            element.name,
            element.origin,
            element.ordinal,
        )
    raise TypeError(f"cannot substitute into {type(element).__name__}")


def canonical_form(rule: Rule) -> Rule:
    """The rule with variables renamed V0, V1, ... by first occurrence, name dropped."""
    mapping: Dict[Variable, Variable] = {}

    def visit(v: Variable):
        if v not in mapping:
            mapping[v] = Variable(f"V{len(mapping)}")

    for lit in rule.head:
        for v in lit.variables():
            visit(v)
    for el in rule.body:
        if isinstance(el, CountAggregate):
            for v in el.bound_vars:
                visit(v)
            for v in el.pattern.variables():
                visit(v)
            if isinstance(el.guard, Variable):
                visit(el.guard)
        else:
            for v in el.variables():
                visit(v)

    def rename(el):
        if isinstance(el, CountAggregate):
            return CountAggregate(
                tuple(mapping[v] for v in el.bound_vars),
                apply_substitution(el.pattern, mapping),
                el.op,
                _subst_term(el.guard, mapping),
            )
        return apply_substitution(el, mapping)

    return Rule(
        tuple(apply_substitution(h, mapping) for h in rule.head),
        tuple(rename(b) for b in rule.body),
        rule.kind,
        rule.weight,
        rule.level,
    )


def alpha_equal(a: Rule, b: Rule) -> bool:
    """Structural equality up to consistent variable renaming; names and origins ignored."""
    return canonical_form(a) == canonical_form(b)
