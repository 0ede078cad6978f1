"""Random ground programs, as oracle tuples and as source text."""

from __future__ import annotations

import random
from typing import List, Sequence, Tuple

from hypothesis import strategies as st

from .oracles import GroundRule


def rule_text(rule: GroundRule) -> str:
    head, pos, neg = rule
    body = [*sorted(pos), *(f"not {a}" for a in sorted(neg))]
    left = " | ".join(sorted(head))
    if not body:
        return f"{left}."
    return f"{left} :- {', '.join(body)}."


def program_text(rules: Sequence[GroundRule]) -> str:
    return "\n".join(rule_text(r) for r in rules) + "\n"


def _atoms(n_atoms: int, negation: bool) -> List[str]:
    atoms = [f"a{i}" for i in range(n_atoms)]
    if negation:
        # a few strongly negated twins; both count towards the atom budget
        atoms = atoms[: n_atoms - n_atoms // 3] + [f"-a{i}" for i in range(n_atoms // 3)]
    return atoms


def random_program(rng: random.Random, max_atoms: int = 10, max_rules: int = 15) -> List[GroundRule]:
    atoms = _atoms(rng.randint(1, max_atoms), rng.random() < 0.5)
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        head = frozenset(rng.sample(atoms, min(len(atoms), rng.choice([0, 1, 1, 1, 2]))))
        pos = frozenset(rng.sample(atoms, min(len(atoms), rng.choice([0, 0, 1, 2]))))
        neg = frozenset(rng.sample(atoms, min(len(atoms), rng.choice([0, 1, 1, 2]))))
        if not head and not pos and not neg:
            continue
        rules.append((head, pos, neg))
    return rules


@st.composite
def ground_programs(draw, max_atoms: int = 8, max_rules: int = 10):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_program(random.Random(seed), max_atoms, max_rules)


def random_predicate_program(rng: random.Random, max_preds: int = 8) -> Tuple[List[str], str]:
    """Propositional program over at most ``max_preds`` predicates with every rule kind."""
    preds = [f"p{i}" for i in range(rng.randint(1, max_preds))]
    lines = []
    for _ in range(rng.randint(1, 12)):
        kind = rng.random()
        body = rng.sample(preds, rng.randint(0, min(3, len(preds))))
        naf = [f"not {p}" if rng.random() < 0.3 else p for p in body]
        if kind < 0.15 and naf:
            lines.append(f":- {', '.join(naf)}.")
        elif kind < 0.25 and naf:
            lines.append(f":~ {', '.join(naf)}. [1:1]")
        else:
            head = " | ".join(rng.sample(preds, rng.choice([1, 1, 2]) if len(preds) > 1 else 1))
            lines.append(f"{head} :- {', '.join(naf)}." if naf else f"{head}.")
    return preds, "\n".join(lines) + "\n"
