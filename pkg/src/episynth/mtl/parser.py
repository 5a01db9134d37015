"""Recursive-descent parser for the specification text grammar.

Grammar (tightest binding first):
    unary  := '!' unary | 'G' bounds unary | 'F' bounds unary
            | '(' or_expr ')' | 'true' | atom
    until  := unary ('U' bounds until)?          (right-associative)
    and    := until ('&' until)*                 (left-associative)
    or     := and ('|' and)*                     (left-associative)
    atom   := (I|E|S|R|D) ('<='|'>=') NUMBER
    bounds := '[' INT ',' INT ']'

Bounds are integer days with lo <= hi.
"""
from __future__ import annotations

import re

from ..errors import SpecSyntaxError
from .formula import (GE, LE, VAR_INDEX, Always, And, Atom, Eventually,
                      Formula, Not, Or, TrueFormula, Until)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<word>[A-Za-z_]\w*)
  | (?P<op><=|>=|[-!&|()\[\],])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SpecSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.idx = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.idx]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def expect(self, value: str) -> tuple[str, str, int]:
        kind, text, pos = self.peek()
        if text != value:
            raise SpecSyntaxError(f"expected {value!r}, found {text or 'end of input'!r}", pos)
        return self.advance()

    def parse(self) -> Formula:
        formula = self.parse_or()
        kind, text, pos = self.peek()
        if kind != "eof":
            raise SpecSyntaxError(f"unexpected trailing input {text!r}", pos)
        return formula

    def parse_or(self) -> Formula:
        node = self.parse_and()
        while self.peek()[1] == "|":
            self.advance()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> Formula:
        node = self.parse_until()
        while self.peek()[1] == "&":
            self.advance()
            node = And(node, self.parse_until())
        return node

    def parse_until(self) -> Formula:
        node = self.parse_unary()
        kind, text, pos = self.peek()
        if kind == "word" and text == "U":
            self.advance()
            lo, hi = self.parse_bounds(pos)
            return Until(node, self.parse_until(), lo, hi)
        return node

    def parse_unary(self) -> Formula:
        kind, text, pos = self.peek()
        if text == "!":
            self.advance()
            return Not(self.parse_unary())
        if kind == "word" and text in ("G", "F"):
            self.advance()
            lo, hi = self.parse_bounds(pos)
            child = self.parse_unary()
            return Always(child, lo, hi) if text == "G" else Eventually(child, lo, hi)
        if text == "(":
            self.advance()
            node = self.parse_or()
            self.expect(")")
            return node
        if kind == "word" and text == "true":
            self.advance()
            return TrueFormula()
        if kind == "word":
            return self.parse_atom()
        raise SpecSyntaxError(f"expected a formula, found {text or 'end of input'!r}", pos)

    def parse_atom(self) -> Formula:
        kind, name, pos = self.advance()
        if name not in VAR_INDEX:
            raise SpecSyntaxError(f"unknown variable name {name!r}", pos)
        kind, rel, pos = self.advance()
        if rel not in (LE, GE):
            raise SpecSyntaxError(f"expected '<=' or '>=', found {rel or 'end of input'!r}", pos)
        sign = 1.0
        if self.peek()[1] == "-":
            self.advance()
            sign = -1.0
        kind, num, pos = self.peek()
        if kind != "number":
            raise SpecSyntaxError(f"expected a number, found {num or 'end of input'!r}", pos)
        self.advance()
        return Atom(VAR_INDEX[name], rel, sign * float(num))

    def parse_bounds(self, op_pos: int) -> tuple[int, int]:
        self.expect("[")
        lo = self.parse_int()
        self.expect(",")
        hi = self.parse_int()
        self.expect("]")
        if lo > hi:
            raise SpecSyntaxError(f"time bounds must satisfy {lo} <= {hi}", op_pos)
        return lo, hi

    def parse_int(self) -> int:
        kind, text, pos = self.peek()
        if kind != "number" or not text.isdigit():
            raise SpecSyntaxError(f"expected an integer day bound, found {text or 'end of input'!r}", pos)
        self.advance()
        return int(text)


def parse(text: str) -> Formula:
    """Parse a specification string into a Formula tree."""
    return _Parser(text).parse()
