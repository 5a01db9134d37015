"""Minimal closed-interval arithmetic used by the box reachability step.

Endpoints may be +/-inf (a diverged bound is recorded, never an error).
Multiplication takes the corner-product hull; any 0*inf corner is the
limit of a constant-zero factor and contributes 0. Division by an
interval containing zero yields the unbounded hull (-inf, inf).
"""
from __future__ import annotations

import math
from dataclasses import dataclass


def _corner_products(a_lo, a_hi, b_lo, b_hi):
    for a in (a_lo, a_hi):
        for b in (b_lo, b_hi):
            p = a * b
            if math.isnan(p):  # 0 * inf corner
                p = 0.0
            yield p


@dataclass(frozen=True)
class Ival:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: float) -> "Ival":
        return cls(value, value)

    @staticmethod
    def _coerce(other) -> "Ival":
        return other if isinstance(other, Ival) else Ival.point(float(other))

    def __add__(self, other) -> "Ival":
        other = self._coerce(other)
        return Ival(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "Ival":
        return Ival(-self.hi, -self.lo)

    def __sub__(self, other) -> "Ival":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Ival":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "Ival":
        other = self._coerce(other)
        products = list(_corner_products(self.lo, self.hi, other.lo, other.hi))
        return Ival(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Ival":
        other = self._coerce(other)
        if other.lo <= 0.0 <= other.hi:
            return Ival(-math.inf, math.inf)
        quotients = list(_corner_products(self.lo, self.hi, 1.0 / other.hi, 1.0 / other.lo))
        return Ival(min(quotients), max(quotients))

    def __rtruediv__(self, other) -> "Ival":
        return self._coerce(other) / self

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= value <= self.hi + tol

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)
