"""Reader and writer for the DLV dialect of ASP used by test inputs.

Supported: facts, disjunctive rules (``|`` or ``v``), constraints, weak
constraints ``:~ body. [w:l]``, default negation ``not``, strong negation
``-p``, built-in comparisons and ``#count`` inside (weak) constraint bodies.
A line comment consisting of a single identifier names the rule that starts
on the next line::

    % r1
    inClique(X) | outClique(X) :- node(X).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .core import (
    Atom,
    ClassicalLiteral,
    Comparison,
    CountAggregate,
    DuplicateRuleName,
    IntConstant,
    NafLiteral,
    Program,
    Rule,
    RuleKind,
    StrConstant,
    SymConstant,
    Term,
    Variable,
)
from .diagnostics import DiagnosticError, ParseDiagnostic, error

NAME_COMMENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

_TOKENS = [
    ("WS", r"[ \t\r\n]+"),
    ("BLOCK_COMMENT", r"%\*.*?\*%"),
    ("COMMENT", r"%[^\n]*"),
    ("IF", r":-"),
    ("WIF", r":~"),
    ("COUNT", r"#count"),
    ("NUMBER", r"\d+"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("VARIABLE", r"[A-Z_][A-Za-z0-9_]*"),
    ("IDENT", r"[a-z][A-Za-z0-9_]*"),
    ("OP", r"<=|>=|!=|<>|==|<|>|="),
    ("PUNCT", r"[(),.|:\[\]{}@-]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{k}>{p})" for k, p in _TOKENS), re.DOTALL)
_OP_ALIASES = {"==": "=", "<>": "!="}
_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "!=": "!="}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int

    def is_(self, kind: str, text: Optional[str] = None) -> bool:
        return self.kind == kind and (text is None or self.text == text)


def tokenize(text: str, origin: str = "") -> Tuple[List[Token], Dict[int, str]]:
    """Split ``text`` into tokens; also return rule-name comments keyed by line."""
    tokens: List[Token] = []
    names: Dict[int, str] = {}
    pos, line, line_start = 0, 1, 0
    last_token_line = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise DiagnosticError([error(f"unexpected character {text[pos]!r}", origin, line, col)])
        kind, value = m.lastgroup, m.group()
        col = pos - line_start + 1
        if kind == "COMMENT":
            content = value[1:].strip()
            if last_token_line < line and NAME_COMMENT_RE.match(content):
                names[line] = content
        elif kind not in ("WS", "BLOCK_COMMENT"):
            tokens.append(Token(kind, value, line, col))
            last_token_line = line
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens, names


def _unescape(quoted: str) -> str:
    body = quoted[1:-1]
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), body)


class _RuleParser:
    def __init__(self, text: str, origin: str):
        self.origin = origin
        self.tokens, self.names = tokenize(text, origin)
        self.pos = 0
        # variable -> first (line, column) in the current rule
        self.var_pos: Dict[Variable, Tuple[int, int]] = {}
        self.anon = 0

    # -- token helpers -------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise DiagnosticError([error(f"{message}, found {found}", self.origin, tok.line, tok.column)])

    def expect(self, kind: str, text: Optional[str] = None, what: Optional[str] = None) -> Token:
        if not self.tok.is_(kind, text):
            self.fail(f"expected {what or text or kind.lower()}")
        return self.advance()

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        if self.tok.is_(kind, text):
            return self.advance()
        return None

    # -- grammar ----------------------------------------------------------

    def term(self) -> Term:
        t = self.tok
        if t.kind == "VARIABLE":
            self.advance()
            if t.text == "_":
                self.anon += 1
                var = Variable(f"_Anon{self.anon}")
            else:
                var = Variable(t.text)
            self.var_pos.setdefault(var, (t.line, t.column))
            return var
        if t.kind == "NUMBER":
            self.advance()
            return IntConstant(int(t.text))
        if t.is_("PUNCT", "-") and self.peek().kind == "NUMBER":
            self.advance()
            return IntConstant(-int(self.advance().text))
        if t.kind == "STRING":
            self.advance()
            return StrConstant(_unescape(t.text))
        if t.kind == "IDENT":
            if self.peek().is_("PUNCT", "("):
                self.fail("function symbols are not supported", self.peek())
            self.advance()
            return SymConstant(t.text)
        self.fail("expected a term")

    def classical_literal(self) -> ClassicalLiteral:
        negated = bool(self.accept("PUNCT", "-"))
        name = self.expect("IDENT", what="a predicate name")
        if name.text == "not":
            self.fail("'not' is reserved", name)
        terms: List[Term] = []
        if self.accept("PUNCT", "("):
            terms.append(self.term())
            while self.accept("PUNCT", ","):
                terms.append(self.term())
            self.expect("PUNCT", ")")
        return ClassicalLiteral(Atom(name.text, tuple(terms)), negated)

    def op(self) -> str:
        t = self.expect("OP", what="a comparison operator")
        return _OP_ALIASES.get(t.text, t.text)

    def aggregate(self) -> Tuple[Tuple[Variable, ...], ClassicalLiteral]:
        self.expect("COUNT")
        self.expect("PUNCT", "{")
        bound = [self.term()]
        while self.accept("PUNCT", ","):
            bound.append(self.term())
        for b in bound:
            if not isinstance(b, Variable):
                self.fail("#count elements must be variables")
        self.expect("PUNCT", ":")
        pattern = self.classical_literal()
        self.expect("PUNCT", "}")
        return tuple(bound), pattern

    def body_element(self, allow_aggregates: bool):
        t = self.tok
        if t.is_("IDENT", "not"):
            self.advance()
            return NafLiteral(self.classical_literal(), True)
        if t.kind == "COUNT":
            if not allow_aggregates:
                self.fail("#count is only allowed in constraint bodies")
            bound, pattern = self.aggregate()
            op = self.op()
            return CountAggregate(bound, pattern, op, self.term())
        is_literal = (
            (t.kind == "IDENT" and not self.peek().kind == "OP")
            or (t.is_("PUNCT", "-") and self.peek().kind == "IDENT")
        )
        if is_literal:
            return NafLiteral(self.classical_literal(), False)
        left = self.term()
        op = self.op()
        if self.tok.kind == "COUNT":
            if not allow_aggregates:
                self.fail("#count is only allowed in constraint bodies")
            bound, pattern = self.aggregate()
            return CountAggregate(bound, pattern, _FLIP[op], left)
        return Comparison(left, op, self.term())

    def body(self, allow_aggregates: bool) -> Tuple:
        elements = [self.body_element(allow_aggregates)]
        while self.accept("PUNCT", ","):
            elements.append(self.body_element(allow_aggregates))
        return tuple(elements)

    def head(self) -> Tuple[ClassicalLiteral, ...]:
        lits = [self.classical_literal()]
        while self.accept("PUNCT", "|") or self.accept("IDENT", "v"):
            lits.append(self.classical_literal())
        return tuple(lits)

    def weak_annotation(self) -> Tuple[int, int]:
        weight, level = 1, 1
        if not self.accept("PUNCT", "["):
            return weight, level
        if self.tok.kind == "NUMBER":
            weight = int(self.advance().text)
        if self.accept("PUNCT", ":") or self.accept("PUNCT", "@"):
            if self.tok.kind == "NUMBER":
                level = int(self.advance().text)
        self.expect("PUNCT", "]")
        if weight < 1 or level < 1:
            self.fail("weak constraint weight and level must be positive", self.tokens[self.pos - 1])
        return weight, level

    def rule(self) -> Tuple[Rule, Token]:
        start = self.tok
        self.var_pos = {}
        if self.accept("WIF"):
            body = self.body(True)
            self.expect("PUNCT", ".")
            weight, level = self.weak_annotation()
            return Rule((), body, RuleKind.WEAK, weight, level), start
        if self.accept("IF"):
            body = self.body(True)
            self.expect("PUNCT", ".")
            return Rule((), body, RuleKind.CONSTRAINT), start
        head = self.head()
        body: Tuple = ()
        if self.accept("IF"):
            body = self.body(False)
        self.expect("PUNCT", ".", "'.' or ':-'")
        return Rule(head, body), start


def safety_errors(rule: Rule, origin: str = "", positions: Optional[Dict[Variable, Tuple[int, int]]] = None) -> List[ParseDiagnostic]:
    """Variables of ``rule`` not bound by a positive, non-aggregate body literal."""
    bound = {v for lit in rule.positive_body() for v in lit.variables()}
    needed: List[Variable] = []
    for lit in rule.head:
        needed.extend(lit.variables())
    for el in rule.body:
        if isinstance(el, NafLiteral):
            if el.default_negated:
                needed.extend(el.variables())
        elif isinstance(el, Comparison):
            needed.extend(el.variables())
        elif isinstance(el, CountAggregate) and isinstance(el.guard, Variable):
            needed.append(el.guard)
    out, seen = [], set()
    for v in needed:
        if v in bound or v in seen:
            continue
        seen.add(v)
        line, col = (positions or {}).get(v, (0, 0))
        shown = "_" if v.name.startswith("_Anon") else v.name
        out.append(error(f"unsafe variable {shown} in rule '{rule}'", origin, line, col))
    return out


def parse_program(text: str, origin: str = "") -> Tuple[Program, List[ParseDiagnostic]]:
    """Parse ASP source into a Program.

    Raises DiagnosticError on syntax errors, unsafe rules, duplicate rule
    names or predicates used with two arities. Returns the program together
    with non-fatal diagnostics.
    """
    parser = _RuleParser(text, origin)
    rules: List[Rule] = []
    problems: List[ParseDiagnostic] = []
    named_lines = set()
    names_seen: Dict[str, Token] = {}
    arities: Dict[str, Tuple[int, Token]] = {}
    while parser.tok.kind != "EOF":
        rule, start = parser.rule()
        name = None
        if start.line - 1 in parser.names and start.line not in named_lines:
            name = parser.names[start.line - 1]
            named_lines.add(start.line)
            if name in names_seen:
                problems.append(error(f"duplicate rule name {name}", origin, start.line, start.column))
            names_seen[name] = start
        problems.extend(safety_errors(rule, origin, parser.var_pos))
        for lit in _literals(rule):
            known = arities.get(lit.predicate)
            if known is None:
                arities[lit.predicate] = (lit.arity, start)
            elif known[0] != lit.arity:
                problems.append(error(
                    f"predicate {lit.predicate} used with arity {lit.arity} and {known[0]}",
                    origin, start.line, start.column))
        rules.append(Rule(rule.head, rule.body, rule.kind, rule.weight, rule.level, name, origin, len(rules)))
    errors = [d for d in problems if d.is_error]
    if errors:
        raise DiagnosticError(errors)
    return Program(tuple(rules)), [d for d in problems if not d.is_error]


def _literals(rule: Rule) -> Iterable[ClassicalLiteral]:
    yield from rule.head
    for el in rule.body:
        if isinstance(el, NafLiteral):
            yield el.literal
        elif isinstance(el, CountAggregate):
            yield el.pattern


def check_program_set(programs: Iterable[Program]) -> List[ParseDiagnostic]:
    """Cross-file checks: arity conflicts and duplicate rule names."""
    problems = []
    arities: Dict[str, Tuple[int, str]] = {}
    names: Dict[str, str] = {}
    for program in programs:
        for rule in program:
            if rule.name is not None:
                if rule.name in names and names[rule.name] != rule.origin:
                    problems.append(error(
                        f"duplicate rule name {rule.name} (also in {names[rule.name]})", rule.origin))
                names.setdefault(rule.name, rule.origin)
            for lit in _literals(rule):
                known = arities.setdefault(lit.predicate, (lit.arity, rule.origin))
                if known[0] != lit.arity:
                    problems.append(error(
                        f"predicate {lit.predicate} used with arity {lit.arity} here and {known[0]} in {known[1]}",
                        rule.origin))
    return problems


def parse_rule(text: str, origin: str = "") -> Rule:
    program, _ = parse_program(text, origin)
    if len(program) != 1:
        raise DiagnosticError([error(f"expected exactly one rule, got {len(program)}", origin)])
    return program.rules[0]


def parse_atom_list(text: str, origin: str = "") -> List[ClassicalLiteral]:
    """Parse ``"p(1). -q(X)."`` into literals; the final period may be omitted."""
    parser = _RuleParser(text, origin)
    lits = []
    while parser.tok.kind != "EOF":
        lits.append(parser.classical_literal())
        if not parser.accept("PUNCT", ".") and parser.tok.kind != "EOF":
            parser.fail("expected '.'")
    if not lits:
        raise DiagnosticError([error("empty atom list", origin, 1, 1)])
    return lits


def parse_ground_literals(text: str, origin: str = "", separator: Optional[str] = ",") -> List[ClassicalLiteral]:
    """Parse solver output such as ``a, -b(1), c`` (separator None means whitespace)."""
    parser = _RuleParser(text, origin)
    lits = []
    while parser.tok.kind != "EOF":
        if lits and separator is not None:
            parser.expect("PUNCT", separator)
        lit = parser.classical_literal()
        if not lit.is_ground:
            parser.fail(f"non-ground literal {lit} in solver output")
        lits.append(lit)
    return lits


# ---------------------------------------------------------------------------
# Serialization


def format_rule(rule: Rule, dialect: str = "dlv", rule_id: int = 0) -> str:
    if rule.kind is RuleKind.WEAK and dialect == "clingo":
        # clingo sums weights per distinct tuple; the id and variables keep
        # every ground instance distinct, as DLV does
        body = ", ".join(str(el) for el in rule.body)
        seen: List[str] = []
        for v in rule.variables():
            if v.name not in seen and not _is_local(rule, v):
                seen.append(v.name)
        extra = "".join(f",{v}" for v in seen)
        return f":~ {body}. [{rule.weight}@{rule.level},{rule_id}{extra}]"
    return str(rule)


def _is_local(rule: Rule, v: Variable) -> bool:
    for el in rule.body:
        if isinstance(el, NafLiteral) and not el.default_negated and v in set(el.variables()):
            return False
    return True


def serialize_program(program: Program, dialect: str = "dlv") -> str:
    """Emit one rule per line; rule names become ``% name`` comment lines."""
    if dialect not in ("dlv", "clingo"):
        raise ValueError(f"unknown dialect {dialect!r}")
    lines = []
    for i, rule in enumerate(program):
        if rule.name is not None:
            lines.append(f"% {rule.name}")
        lines.append(format_rule(rule, dialect, i))
    return "".join(line + "\n" for line in lines)


def program_from_rules(rules: Iterable[Rule]) -> Program:
    try:
        return Program(tuple(rules))
    except DuplicateRuleName as exc:
        raise DiagnosticError([error(str(exc))]) from exc
