"""CNF formulas, DIMACS I/O, pigeonhole instances and variable orderings.

Literals are DIMACS-style signed integers: ``v`` for the positive literal of
variable ``v`` and ``-v`` for its negation.  A clause is a tuple of literals.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Clause = tuple[int, ...]


class DimacsError(ValueError):
    """Malformed DIMACS input.  ``kind`` names the failure, ``line`` is 1-based."""

    def __init__(self, kind: str, line: int, detail: str = ""):
        self.kind = kind
        self.line = line
        msg = f"line {line}: {kind}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


def normalize_clause(lits: Iterable[int]) -> Clause:
    """Drop duplicate literals, keeping first-occurrence order."""
    seen = set()
    out = []
    for lit in lits:
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


def is_tautology(clause: Sequence[int]) -> bool:
    lits = set(clause)
    return any(-lit in lits for lit in lits)


@dataclass
class Cnf:
    num_vars: int
    clauses: list[Clause] = field(default_factory=list)
    names: dict[str, int] | None = field(default=None, compare=False)

    def __post_init__(self):
        self.clauses = [normalize_clause(c) for c in self.clauses]
        for clause in self.clauses:
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{self.num_vars}")

    @property
    def tautological(self) -> list[bool]:
        """Per-clause flag: True where the clause contains a complementary pair."""
        return [is_tautology(c) for c in self.clauses]

    def evaluate(self, assignment) -> bool:
        """``assignment`` maps variable -> bool (dict or sequence indexed from 1)."""
        return all(any(assignment[abs(l)] == (l > 0) for l in c) for c in self.clauses)


def parse_dimacs(text: str) -> Cnf:
    num_vars = num_clauses = None
    clauses: list[Clause] = []
    current: list[int] = []
    last_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if num_vars is not None:
                raise DimacsError("malformed header", lineno, "duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError("malformed header", lineno, line)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError("malformed header", lineno, line) from None
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError("malformed header", lineno, line)
            continue
        if num_vars is None:
            raise DimacsError("malformed header", lineno, "clause before header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError("malformed literal", lineno, tok) from None
            if lit == 0:
                clauses.append(normalize_clause(current))
                current = []
            elif abs(lit) > num_vars:
                raise DimacsError("literal out of range", lineno, tok)
            else:
                current.append(lit)
    if num_vars is None:
        raise DimacsError("malformed header", last_line, "missing header")
    if current:
        raise DimacsError("unterminated clause", last_line)
    if len(clauses) != num_clauses:
        raise DimacsError(
            "clause count mismatch", last_line, f"header says {num_clauses}, found {len(clauses)}"
        )
    return Cnf(num_vars, clauses)


def serialize_dimacs(cnf: Cnf) -> str:
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    lines.extend(" ".join(map(str, c + (0,))) for c in cnf.clauses)
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Permutation:
    """Total order over variables 1..n.

    ``order[k]`` is the variable at position ``k`` (0-based) and
    ``position[v]`` its inverse; ``position[0]`` is unused.
    """

    order: tuple[int, ...]
    position: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.order)
        if sorted(self.order) != list(range(1, n + 1)):
            raise ValueError("ordering is not a permutation of 1..%d" % n)
        pos = [-1] * (n + 1)
        for k, v in enumerate(self.order):
            pos[v] = k
        object.__setattr__(self, "position", tuple(pos))

    @classmethod
    def identity(cls, n: int) -> Permutation:
        return cls(tuple(range(1, n + 1)))

    def __len__(self):
        return len(self.order)

    def to_text(self) -> str:
        return "".join(f"{v}\n" for v in self.order)

    @classmethod
    def from_text(cls, text: str) -> Permutation:
        """One variable index per line; blank lines and ``c`` comments ignored."""
        order = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("c"):
                continue
            try:
                order.append(int(line))
            except ValueError:
                raise ValueError(f"ordering line {lineno}: not an integer: {line!r}") from None
        return cls(tuple(order))


@dataclass(frozen=True)
class PhpLayout:
    """Grid of variables p[i][j] for hole i in 1..holes and pigeon j in 1..pigeons.

    Variables are numbered row by row: p[i][j] = (i-1)*pigeons + j.
    """

    holes: int
    pigeons: int

    def var(self, i: int, j: int) -> int:
        if not (1 <= i <= self.holes and 1 <= j <= self.pigeons):
            raise IndexError((i, j))
        return (i - 1) * self.pigeons + j

    @property
    def num_vars(self) -> int:
        return self.holes * self.pigeons

    def name(self, v: int) -> str:
        i, j = divmod(v - 1, self.pigeons)
        return f"p_{i + 1}_{j + 1}"

    def names(self) -> dict[str, int]:
        return {self.name(v): v for v in range(1, self.num_vars + 1)}


def _php_clauses(layout: PhpLayout) -> list[Clause]:
    h, p = layout.holes, layout.pigeons
    clauses = [tuple(layout.var(i, j) for i in range(1, h + 1)) for j in range(1, p + 1)]
    for i in range(1, h + 1):
        for j in range(1, p + 1):
            for k in range(j + 1, p + 1):
                clauses.append((-layout.var(i, j), -layout.var(i, k)))
    return clauses


def gen_php(n: int) -> tuple[Cnf, PhpLayout]:
    """Direct encoding of n+1 pigeons into n holes (unsatisfiable)."""
    if n < 1:
        raise ValueError("need at least one hole")
    layout = PhpLayout(n, n + 1)
    return Cnf(layout.num_vars, _php_clauses(layout), layout.names()), layout


def gen_php_satisfiable(n: int) -> tuple[Cnf, PhpLayout]:
    """Same clause schemas with n pigeons and n holes (satisfiable)."""
    if n < 1:
        raise ValueError("need at least one hole")
    layout = PhpLayout(n, n)
    return Cnf(layout.num_vars, _php_clauses(layout), layout.names()), layout


ORDERING_KINDS = ("pigeon-major", "hole-major")


def ordering(layout: PhpLayout, kind: str) -> Permutation:
    """``pigeon-major`` lists p11, p12, ... (row-major); ``hole-major`` lists p11, p21, ... (column-major)."""
    rows = range(1, layout.holes + 1)
    cols = range(1, layout.pigeons + 1)
    if kind == "pigeon-major":
        order = [layout.var(i, j) for i in rows for j in cols]
    elif kind == "hole-major":
        order = [layout.var(i, j) for j in cols for i in rows]
    else:
        raise ValueError(f"unknown ordering kind {kind!r}")
    return Permutation(tuple(order))


def random_kcnf(num_vars: int, num_clauses: int, k: int = 3, rng: random.Random | None = None) -> Cnf:
    """Uniform random k-CNF: distinct variables per clause, random signs."""
    rng = rng or random.Random()
    k = min(k, num_vars)
    clauses = []
    for _ in range(num_clauses):
        vs = rng.sample(range(1, num_vars + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return Cnf(num_vars, clauses)


def random_permutation(n: int, rng: random.Random) -> Permutation:
    order = list(range(1, n + 1))
    rng.shuffle(order)
    return Permutation(tuple(order))
