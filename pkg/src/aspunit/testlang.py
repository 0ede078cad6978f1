"""Parser for test-suite files.

A suite file looks like::

    invocation("MaximalClique", "/usr/bin/dlv", "");
    inputFile("clique.dl");
    inputFile("graphInstance.dl");

    guessClique(SPLIT_PROGRAM)
    {
      selectRule("r1");
      assertFalseInAtMost(1, "inClique(X).");
      assertBravelyTrue("inClique(X).");
    }

Statements end with ``;``; newlines are insignificant and ``%`` starts a line
comment. Assertions written after the last test case are global and are run
as an implicit trailing case named ``__global__``.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .core import ClassicalLiteral, Program, Rule, RuleKind
from .diagnostics import DiagnosticError, ParseDiagnostic, error, warning
from .parser import parse_atom_list, parse_program

GLOBAL_CASE = "__global__"


class Mode(Enum):
    SELECTED_RULES = "SELECTED_RULES"
    SPLIT_PROGRAM = "SPLIT_PROGRAM"
    PROGRAM = "PROGRAM"


@dataclass(frozen=True)
class InlineProgram:
    text: str
    program: Program = field(compare=False, repr=False, default_factory=Program)


@dataclass(frozen=True)
class FileRef:
    path: str


InputSpec = Union[InlineProgram, FileRef]


class Polarity(Enum):
    FILTER = "filter"
    PFILTER = "pfilter"
    NFILTER = "nfilter"


@dataclass(frozen=True)
class FilterSpec:
    polarity: Polarity
    # None means "head predicates of the selected rules"
    predicates: Optional[Tuple[str, ...]] = None

    @property
    def selected_rules(self) -> bool:
        return self.predicates is None


class Kind(Enum):
    TRUE_ALL = "TrueAll"
    TRUE_BRAVE = "TrueBrave"
    TRUE_IN = "TrueIn"
    TRUE_IN_AT_LEAST = "TrueInAtLeast"
    TRUE_IN_AT_MOST = "TrueInAtMost"
    FALSE_ALL = "FalseAll"
    FALSE_BRAVE = "FalseBrave"
    FALSE_IN = "FalseIn"
    FALSE_IN_AT_LEAST = "FalseInAtLeast"
    FALSE_IN_AT_MOST = "FalseInAtMost"
    CONSTRAINT_ALL = "ConstraintAll"
    CONSTRAINT_IN = "ConstraintIn"
    CONSTRAINT_IN_AT_LEAST = "ConstraintInAtLeast"
    CONSTRAINT_IN_AT_MOST = "ConstraintInAtMost"
    BEST_MODEL_COST = "BestModelCost"


# statement name -> (kind, takes a count argument)
ASSERTIONS: Dict[str, Tuple[Kind, bool]] = {
    "assertTrue": (Kind.TRUE_ALL, False),
    "assertCautiouslyTrue": (Kind.TRUE_ALL, False),
    "assertBravelyTrue": (Kind.TRUE_BRAVE, False),
    "assertTrueIn": (Kind.TRUE_IN, True),
    "assertTrueInAtLeast": (Kind.TRUE_IN_AT_LEAST, True),
    "assertTrueInAtMost": (Kind.TRUE_IN_AT_MOST, True),
    "assertFalse": (Kind.FALSE_ALL, False),
    "assertCautiouslyFalse": (Kind.FALSE_ALL, False),
    "assertBravelyFalse": (Kind.FALSE_BRAVE, False),
    "assertFalseIn": (Kind.FALSE_IN, True),
    "assertFalseInAtLeast": (Kind.FALSE_IN_AT_LEAST, True),
    "assertFalseInAtMost": (Kind.FALSE_IN_AT_MOST, True),
    "assertConstraint": (Kind.CONSTRAINT_ALL, False),
    "assertConstraintIn": (Kind.CONSTRAINT_IN, True),
    "assertConstraintInAtLeast": (Kind.CONSTRAINT_IN_AT_LEAST, True),
    "assertConstraintInAtMost": (Kind.CONSTRAINT_IN_AT_MOST, True),
}
_CANONICAL_NAME = {
    Kind.TRUE_ALL: "assertTrue",
    Kind.FALSE_ALL: "assertFalse",
    Kind.BEST_MODEL_COST: "assertBestModelCost",
}
_CANONICAL_NAME.update({k: n for n, (k, _) in ASSERTIONS.items() if k not in _CANONICAL_NAME})


@dataclass(frozen=True)
class Assertion:
    kind: Kind
    count: Optional[int] = None
    atoms: Tuple[ClassicalLiteral, ...] = ()
    constraint: Optional[Rule] = None
    cost: Optional[int] = None
    level: int = 1
    text: str = ""

    @property
    def statement(self) -> str:
        return _CANONICAL_NAME[self.kind]

    @property
    def is_atom_assertion(self) -> bool:
        return self.kind.value.startswith(("True", "False"))

    def __str__(self):
        if self.kind is Kind.BEST_MODEL_COST:
            return f"{self.statement}({self.cost}, {self.level})"
        args = [] if self.count is None else [str(self.count)]
        args.append('"' + self.text.replace('\\', '\\\\').replace('"', '\\"') + '"')
        return f"{self.statement}({', '.join(args)})"


@dataclass(frozen=True)
class TestCase:
    name: str
    mode: Mode = Mode.PROGRAM
    new_options: Optional[str] = None
    local_inputs: Tuple[InputSpec, ...] = ()
    exclusions: Tuple[InputSpec, ...] = ()
    filter: Optional[FilterSpec] = None
    selected_rule_names: Tuple[str, ...] = ()
    assertions: Tuple[Assertion, ...] = ()
    line: int = field(default=0, compare=False)

    __test__ = False  # not a pytest class


@dataclass(frozen=True)
class TestSuite:
    invocation_name: str
    solver_path: Optional[str] = None
    solver_options: Optional[str] = None
    global_inputs: Tuple[InputSpec, ...] = ()
    test_cases: Tuple[TestCase, ...] = ()
    global_assertions: Tuple[Assertion, ...] = ()
    origin: str = field(default="", compare=False)

    __test__ = False

    def cases(self) -> List[TestCase]:
        """Test cases in run order, including the implicit global case."""
        out = list(self.test_cases)
        if self.global_assertions:
            out.append(TestCase(GLOBAL_CASE, Mode.PROGRAM, assertions=self.global_assertions))
        return out

    def file_refs(self) -> List[str]:
        refs = []
        for spec in self.global_inputs:
            if isinstance(spec, FileRef):
                refs.append(spec.path)
        for case in self.test_cases:
            for spec in case.local_inputs + case.exclusions:
                if isinstance(spec, FileRef):
                    refs.append(spec.path)
        return list(dict.fromkeys(refs))


# ---------------------------------------------------------------------------
# Lexer

_TOKEN_RE = re.compile(
    r"""(?P<WS>\s+)|(?P<COMMENT>%[^\n]*)|(?P<STRING>"(?:[^"\\]|\\.)*")
    |(?P<NUMBER>-?\d+)|(?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)|(?P<PUNCT>[(){};,])""",
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    column: int


def _lex(text: str, origin: str) -> List[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DiagnosticError([error(f"unexpected character {text[pos]!r}", origin, line, pos - line_start + 1)])
        kind, value = m.lastgroup, m.group()
        if kind not in ("WS", "COMMENT"):
            toks.append(_Tok(kind, value, line, pos - line_start + 1))
        if "\n" in value:
            line += value.count("\n")
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("EOF", "", line, pos - line_start + 1))
    return toks


def _string_value(tok: _Tok) -> str:
    return re.sub(r"\\(.)", lambda m: m.group(1), tok.text[1:-1])


class _SuiteParser:
    def __init__(self, text: str, origin: str):
        self.origin = origin
        self.toks = _lex(text, origin)
        self.pos = 0
        self.warnings: List[ParseDiagnostic] = []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.pos]

    def peek(self, n: int = 1) -> _Tok:
        return self.toks[min(self.pos + n, len(self.toks) - 1)]

    def advance(self) -> _Tok:
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def fail(self, message: str, tok: Optional[_Tok] = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        raise DiagnosticError([error(f"{message}, found {found}", self.origin, tok.line, tok.column)])

    def expect(self, kind: str, text: Optional[str] = None, what: Optional[str] = None) -> _Tok:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            self.fail(f"expected {what or repr(text) if text else what or kind.lower()}")
        return self.advance()

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[_Tok]:
        t = self.tok
        if t.kind == kind and (text is None or t.text == text):
            return self.advance()
        return None

    def string(self) -> str:
        return _string_value(self.expect("STRING", what="a quoted string"))

    def integer(self, what: str) -> int:
        t = self.tok
        if t.kind != "NUMBER":
            self.fail(f"expected an integer {what}")
        self.advance()
        return int(t.text)

    def end_statement(self):
        self.expect("PUNCT", ")")
        self.expect("PUNCT", ";", "';'")

    # -- ASP fragments -----------------------------------------------------

    def asp_program(self, tok: _Tok, text: str) -> Program:
        origin = f"{self.origin}:{tok.line}"
        try:
            program, _ = parse_program(text, origin)
        except DiagnosticError as exc:
            raise DiagnosticError([
                error(f"in embedded program: {d.message}", self.origin, tok.line, tok.column)
                for d in exc.diagnostics
            ]) from None
        return program

    def input_statement(self) -> InputSpec:
        head = self.advance()
        self.expect("PUNCT", "(")
        arg_tok = self.tok
        value = self.string()
        self.end_statement()
        if head.text in ("input", "excludeInput"):
            return InlineProgram(value, self.asp_program(arg_tok, value))
        return FileRef(os.path.normpath(value))

    # -- statements --------------------------------------------------------

    def invocation(self) -> Tuple[str, Optional[str], Optional[str]]:
        if not self.tok.text == "invocation":
            self.fail("a suite must start with an invocation statement")
        self.advance()
        self.expect("PUNCT", "(")
        name = self.string()
        path = options = None
        if self.accept("PUNCT", ","):
            path = self.string()
            self.expect("PUNCT", ",", "',' and the solver options")
            options = self.string()
        self.end_statement()
        return name, path, options

    def assertion(self) -> Assertion:
        name_tok = self.advance()
        name = name_tok.text
        self.expect("PUNCT", "(")
        if name == "assertBestModelCost":
            cost = self.integer("cost")
            level = 1
            if self.accept("PUNCT", ","):
                level = self.integer("level")
            if level < 1:
                self.fail("level must be at least 1", name_tok)
            self.end_statement()
            return Assertion(Kind.BEST_MODEL_COST, cost=cost, level=level)
        if name not in ASSERTIONS:
            self.fail(f"unknown assertion {name}", name_tok)
        kind, counted = ASSERTIONS[name]
        count = None
        if counted:
            count = self.integer("count")
            self.expect("PUNCT", ",")
        arg_tok = self.tok
        text = self.string()
        self.end_statement()
        if kind.value.startswith("Constraint"):
            program = self.asp_program(arg_tok, text)
            if len(program) != 1 or program.rules[0].kind is not RuleKind.CONSTRAINT:
                raise DiagnosticError([error(
                    f"{name} expects a single constraint ':- body.'", self.origin, arg_tok.line, arg_tok.column)])
            return Assertion(kind, count, constraint=program.rules[0], text=text)
        try:
            atoms = parse_atom_list(text, f"{self.origin}:{arg_tok.line}")
        except DiagnosticError as exc:
            raise DiagnosticError([
                error(f"in atom list: {d.message}", self.origin, arg_tok.line, arg_tok.column)
                for d in exc.diagnostics
            ]) from None
        return Assertion(kind, count, atoms=tuple(atoms), text=text)

    def is_assertion(self) -> bool:
        return self.tok.kind == "IDENT" and self.tok.text.startswith("assert") and self.peek().text == "("

    def filter_statement(self) -> FilterSpec:
        polarity = Polarity(self.advance().text)
        parens = bool(self.accept("PUNCT", "("))
        if self.tok.text == "SELECTED_RULES":
            self.advance()
            preds = None
        else:
            preds = [self.predicate_name()]
            while self.accept("PUNCT", ","):
                preds.append(self.predicate_name())
            preds = tuple(preds)
        if parens:
            self.expect("PUNCT", ")")
        self.expect("PUNCT", ";", "';'")
        return FilterSpec(polarity, preds)

    def predicate_name(self) -> str:
        t = self.tok
        if t.kind == "STRING":
            self.advance()
            return _string_value(t)
        if t.kind == "IDENT" and t.text[0].islower():
            self.advance()
            return t.text
        self.fail("expected a predicate name")

    def select_rule(self) -> str:
        self.advance()
        self.expect("PUNCT", "(")
        t = self.tok
        if t.kind == "STRING":
            name = _string_value(t)
        elif t.kind == "IDENT":
            name = t.text
        else:
            self.fail("expected a rule name")
        self.advance()
        self.end_statement()
        return name

    def test_case(self) -> TestCase:
        name_tok = self.advance()
        self.expect("PUNCT", "(")
        mode = Mode.PROGRAM
        if self.tok.kind == "IDENT":
            if self.tok.text not in Mode.__members__:
                self.fail("expected SELECTED_RULES, SPLIT_PROGRAM or PROGRAM")
            mode = Mode[self.advance().text]
        self.expect("PUNCT", ")")
        self.expect("PUNCT", "{")
        new_options = None
        local_inputs: List[InputSpec] = []
        exclusions: List[InputSpec] = []
        filt = None
        selected: List[str] = []
        assertions: List[Assertion] = []
        while not self.accept("PUNCT", "}"):
            t = self.tok
            if t.kind == "EOF":
                self.fail(f"unterminated test case {name_tok.text}")
            if t.kind != "IDENT":
                self.fail("expected a statement")
            if t.text == "newOptions":
                if new_options is not None:
                    self.fail("newOptions given twice")
                self.advance()
                self.expect("PUNCT", "(")
                new_options = self.string()
                self.end_statement()
            elif t.text in ("input", "inputFile"):
                local_inputs.append(self.input_statement())
            elif t.text in ("excludeInput", "excludeInputFile"):
                exclusions.append(self.input_statement())
            elif t.text in ("filter", "pfilter", "nfilter"):
                if filt is not None:
                    self.fail("only one filter statement per test case")
                filt = self.filter_statement()
            elif t.text == "selectRule":
                selected.append(self.select_rule())
            elif self.is_assertion() or t.text == "assertBestModelCost":
                assertions.append(self.assertion())
            else:
                self.fail("unknown statement")
        if mode is not Mode.PROGRAM and not selected:
            raise DiagnosticError([error(
                f"test case {name_tok.text} runs in {mode.value} mode but selects no rules",
                self.origin, name_tok.line, name_tok.column)])
        return TestCase(
            name_tok.text, mode, new_options, tuple(local_inputs), tuple(exclusions), filt,
            tuple(selected), tuple(assertions), name_tok.line,
        )

    def suite(self) -> TestSuite:
        name, path, options = self.invocation()
        inputs: List[InputSpec] = []
        cases: List[TestCase] = []
        names: Dict[str, _Tok] = {}
        global_assertions: List[Assertion] = []
        while self.tok.kind != "EOF":
            t = self.tok
            if t.kind == "IDENT" and t.text in ("input", "inputFile") and self.peek().text == "(":
                if cases or global_assertions:
                    self.fail("global inputs must precede test cases")
                inputs.append(self.input_statement())
            elif self.is_assertion():
                global_assertions.append(self.assertion())
            elif t.kind == "IDENT" and self.peek().text == "(":
                if global_assertions:
                    self.fail("test cases must precede global assertions")
                if t.text in names:
                    self.fail(f"duplicate test case name {t.text}")
                if t.text == GLOBAL_CASE:
                    self.fail(f"{GLOBAL_CASE} is reserved")
                names[t.text] = t
                cases.append(self.test_case())
            else:
                self.fail("expected an input, test case or assertion")
        return TestSuite(name, path, options, tuple(inputs), tuple(cases), tuple(global_assertions), self.origin)


def parse_test_suite(text: str, origin: str = "") -> Tuple[TestSuite, List[ParseDiagnostic]]:
    """Parse suite source. Raises DiagnosticError on the first syntax error."""
    parser = _SuiteParser(text, origin)
    suite = parser.suite()
    return suite, parser.warnings


# ---------------------------------------------------------------------------
# Validation


def case_programs(suite: TestSuite, case: TestCase, programs: Mapping[str, Program]) -> Tuple[Program, Program]:
    """(global, local) input programs for ``case``; FileRefs looked up in ``programs``."""
    from .units import merge_programs

    def load(specs) -> Program:
        parts = []
        for spec in specs:
            if isinstance(spec, InlineProgram):
                parts.append(spec.program)
            else:
                parts.append(programs[spec.path])
        return merge_programs(parts)

    return load(suite.global_inputs), load(case.local_inputs)


def validate_case(suite: TestSuite, case: TestCase, programs: Mapping[str, Program]) -> List[ParseDiagnostic]:
    from .units import check_selection_compatibility, merge_programs

    origin = suite.origin
    line = case.line
    try:
        global_program, local_program = case_programs(suite, case, programs)
        union = merge_programs([global_program, local_program])
    except DiagnosticError as exc:
        return [error(f"{case.name}: {d.message}", origin, line) for d in exc.diagnostics]
    problems = []
    for name in case.selected_rule_names:
        if name not in union.name_index:
            problems.append(error(f"{case.name}: unknown rule name {name}", origin, line))
    preds = union.predicates()
    if case.filter is not None:
        if case.filter.selected_rules:
            if not case.selected_rule_names:
                problems.append(warning(f"{case.name}: filter(SELECTED_RULES) without selected rules", origin, line))
        else:
            for p in case.filter.predicates:
                if p not in preds:
                    problems.append(warning(f"{case.name}: filter predicate {p} does not occur in the inputs", origin, line))
    if not any(d.is_error for d in problems) and case.selected_rule_names:
        selected = [union.name_index[n] for n in case.selected_rule_names]
        for w in check_selection_compatibility(union, selected):
            problems.append(warning(f"{case.name}: {w}", origin, line))
    return problems


def validate_suite(suite: TestSuite, programs: Mapping[str, Program]) -> List[ParseDiagnostic]:
    """Semantic checks once every FileRef of the suite is parsed.

    ``programs`` maps each FileRef path (as written, normalized) to its
    parsed Program.
    """
    problems = []
    for case in suite.cases():
        problems.extend(validate_case(suite, case, programs))
    return problems
