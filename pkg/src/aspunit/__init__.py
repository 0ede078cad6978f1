"""Unit testing for answer set programs."""

from .core import AnswerSet, CostVector, Program, Rule, SolverResult
from .parser import parse_program, serialize_program
from .solver import solve
from .testlang import parse_test_suite

__all__ = [
    "AnswerSet",
    "CostVector",
    "Program",
    "Rule",
    "SolverResult",
    "parse_program",
    "parse_test_suite",
    "serialize_program",
    "solve",
]
__version__ = "0.1.0"
