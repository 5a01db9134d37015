"""Syntax tree for day-indexed temporal specifications over compartment states.

Atoms compare one state coordinate against a threshold (millions of persons).
Temporal operators carry inclusive integer day bounds [lo, hi]. All nodes are
immutable and hashable, so subtrees can be shared and used as cache keys.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# Coordinate order of the state vector.
STATE_VARS = ("I", "E", "S", "R", "D")
VAR_INDEX = {name: i for i, name in enumerate(STATE_VARS)}

LE = "<="
GE = ">="


@dataclass(frozen=True)
class Formula:
    """Base node. Use the concrete subclasses below."""

    def horizon(self) -> int:
        """Largest forward time offset read when evaluating at one index."""
        raise NotImplementedError

    def __str__(self) -> str:
        return _fmt(self, 0)


@dataclass(frozen=True)
class TrueFormula(Formula):
    def horizon(self) -> int:
        return 0


@dataclass(frozen=True)
class Atom(Formula):
    coordinate: int  # index into STATE_VARS
    relation: str  # LE or GE
    threshold: float

    def __post_init__(self):
        if not 0 <= self.coordinate < len(STATE_VARS):
            raise ValueError(f"coordinate {self.coordinate} out of range")
        if self.relation not in (LE, GE):
            raise ValueError(f"relation must be {LE!r} or {GE!r}")
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")

    def horizon(self) -> int:
        return 0


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    def horizon(self) -> int:
        return self.child.horizon()


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def horizon(self) -> int:
        return max(self.left.horizon(), self.right.horizon())


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def horizon(self) -> int:
        return max(self.left.horizon(), self.right.horizon())


def _check_bounds(lo: int, hi: int) -> None:
    if not (isinstance(lo, int) and isinstance(hi, int)):
        raise ValueError("time bounds must be integers (days)")
    if lo < 0 or lo > hi:
        raise ValueError(f"time bounds must satisfy 0 <= {lo} <= {hi}")


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula
    lo: int
    hi: int

    def __post_init__(self):
        _check_bounds(self.lo, self.hi)

    def horizon(self) -> int:
        # right is read at offsets lo..hi; left at offsets 0..hi-1 (none if hi == 0)
        h = self.hi + self.right.horizon()
        if self.hi >= 1:
            h = max(h, self.hi - 1 + self.left.horizon())
        return h


@dataclass(frozen=True)
class Eventually(Formula):
    child: Formula
    lo: int
    hi: int

    def __post_init__(self):
        _check_bounds(self.lo, self.hi)

    def horizon(self) -> int:
        return self.hi + self.child.horizon()


@dataclass(frozen=True)
class Always(Formula):
    child: Formula
    lo: int
    hi: int

    def __post_init__(self):
        _check_bounds(self.lo, self.hi)

    def horizon(self) -> int:
        return self.hi + self.child.horizon()


def max_aggregation_arity(formula: Formula) -> int:
    """Largest min/max aggregation width appearing anywhere in the recursive
    semantics of `formula` (binary connectives count as width 2)."""
    if isinstance(formula, (TrueFormula, Atom)):
        return 1
    if isinstance(formula, Not):
        return max_aggregation_arity(formula.child)
    if isinstance(formula, (And, Or)):
        return max(2, max_aggregation_arity(formula.left), max_aggregation_arity(formula.right))
    if isinstance(formula, Until):
        window = formula.hi - formula.lo + 1
        # each branch of the outer max is a min over right(k') plus up to hi lefts
        return max(window, formula.hi + 1,
                   max_aggregation_arity(formula.left), max_aggregation_arity(formula.right))
    if isinstance(formula, (Eventually, Always)):
        return max(formula.hi - formula.lo + 1, max_aggregation_arity(formula.child))
    raise TypeError(f"unknown formula node {type(formula).__name__}")


# Precedence levels for printing: higher binds tighter.
_PREC_OR = 1
_PREC_AND = 2
_PREC_UNTIL = 3
_PREC_UNARY = 4


def _fmt(formula: Formula, parent_prec: int) -> str:
    if isinstance(formula, TrueFormula):
        return "true"
    if isinstance(formula, Atom):
        text = f"{STATE_VARS[formula.coordinate]} {formula.relation} {formula.threshold!r}"
        return f"({text})" if parent_prec >= _PREC_UNTIL else text
    if isinstance(formula, Not):
        return f"!{_fmt(formula.child, _PREC_UNARY)}"
    if isinstance(formula, And):
        # left-associative: the right child needs wrapping when it is an And
        left = _fmt(formula.left, _PREC_AND - 1)
        right = _fmt(formula.right, _PREC_AND)
        text = f"{left} & {right}"
        return f"({text})" if parent_prec >= _PREC_AND else text
    if isinstance(formula, Or):
        left = _fmt(formula.left, _PREC_OR - 1)
        right = _fmt(formula.right, _PREC_OR)
        text = f"{left} | {right}"
        return f"({text})" if parent_prec >= _PREC_OR else text
    if isinstance(formula, Until):
        # right-associative
        left = _fmt(formula.left, _PREC_UNTIL)
        right = _fmt(formula.right, _PREC_UNTIL - 1)
        text = f"{left} U[{formula.lo},{formula.hi}] {right}"
        return f"({text})" if parent_prec >= _PREC_UNTIL else text
    if isinstance(formula, Eventually):
        return f"F[{formula.lo},{formula.hi}]{_fmt(formula.child, _PREC_UNARY)}"
    if isinstance(formula, Always):
        return f"G[{formula.lo},{formula.hi}]{_fmt(formula.child, _PREC_UNARY)}"
    raise TypeError(f"unknown formula node {type(formula).__name__}")
