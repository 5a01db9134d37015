"""Boolean, quantitative, interval, and smoothed semantics.

All evaluators share the same recursive structure: atoms measure signed
slack to their threshold (positive inside the satisfying half-space),
negation flips sign, disjunction is max, and until is the bounded
max-of-min nesting. Time indices are trajectory sample indices (days).
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import HorizonError
from .formula import (LE, Always, And, Atom, Eventually, Formula, Not, Or,
                      TrueFormula, Until)
from .trajectory import IntervalTrajectory, RobustnessInterval, Trajectory


def _check_horizon(formula: Formula, k: int, length: int) -> None:
    if k < 0:
        raise HorizonError(f"negative evaluation index {k}")
    needed = k + formula.horizon()
    if needed >= length:
        raise HorizonError(
            f"trajectory of length {length} is too short: evaluation at index {k} "
            f"reads up to index {needed}")


# ---------------------------------------------------------------------------
# Boolean semantics


def eval_boolean(trajectory: Trajectory, formula: Formula, k: int = 0) -> bool:
    """Whether `trajectory` satisfies `formula` at sample index `k`."""
    _check_horizon(formula, k, len(trajectory))
    return _eval_bool(trajectory.states, formula, k)


def _eval_bool(states: np.ndarray, formula: Formula, k: int) -> bool:
    if isinstance(formula, TrueFormula):
        return True
    if isinstance(formula, Atom):
        value = states[k, formula.coordinate]
        return bool(value <= formula.threshold if formula.relation == LE
                    else value >= formula.threshold)
    if isinstance(formula, Not):
        return not _eval_bool(states, formula.child, k)
    if isinstance(formula, And):
        return _eval_bool(states, formula.left, k) and _eval_bool(states, formula.right, k)
    if isinstance(formula, Or):
        return _eval_bool(states, formula.left, k) or _eval_bool(states, formula.right, k)
    if isinstance(formula, Eventually):
        return any(_eval_bool(states, formula.child, j)
                   for j in range(k + formula.lo, k + formula.hi + 1))
    if isinstance(formula, Always):
        return all(_eval_bool(states, formula.child, j)
                   for j in range(k + formula.lo, k + formula.hi + 1))
    if isinstance(formula, Until):
        prefix_holds = True
        satisfied = False
        for j in range(k, k + formula.hi + 1):
            if j >= k + formula.lo and prefix_holds and _eval_bool(states, formula.right, j):
                satisfied = True
                break
            if not prefix_holds:
                break
            if j < k + formula.hi:  # left is never read at the last branch index
                prefix_holds = prefix_holds and _eval_bool(states, formula.left, j)
        return satisfied
    raise TypeError(f"unknown formula node {type(formula).__name__}")


# ---------------------------------------------------------------------------
# Quantitative semantics


def robustness(trajectory: Trajectory, formula: Formula, k: int = 0) -> float:
    """Signed satisfaction margin of `formula` on `trajectory` at index `k`."""
    _check_horizon(formula, k, len(trajectory))
    return float(_rob_batch(trajectory.states[np.newaxis], formula, k, {})[0])


def robustness_batch(states: np.ndarray, formula: Formula, k: int = 0) -> np.ndarray:
    """Robustness of a batch of trajectories, shape (n, T+1, 5) -> (n,)."""
    states = np.asarray(states, dtype=float)
    _check_horizon(formula, k, states.shape[1])
    return _rob_batch(states, formula, k, {})


def _rob_batch(states: np.ndarray, formula: Formula, k: int, memo: dict) -> np.ndarray:
    key = (id(formula), k)
    cached = memo.get(key)
    if cached is not None:
        return cached
    n = states.shape[0]
    if isinstance(formula, TrueFormula):
        out = np.full(n, np.inf)
    elif isinstance(formula, Atom):
        value = states[:, k, formula.coordinate]
        out = formula.threshold - value if formula.relation == LE else value - formula.threshold
    elif isinstance(formula, Not):
        out = -_rob_batch(states, formula.child, k, memo)
    elif isinstance(formula, And):
        out = np.minimum(_rob_batch(states, formula.left, k, memo),
                         _rob_batch(states, formula.right, k, memo))
    elif isinstance(formula, Or):
        out = np.maximum(_rob_batch(states, formula.left, k, memo),
                         _rob_batch(states, formula.right, k, memo))
    elif isinstance(formula, Eventually):
        out = np.full(n, -np.inf)
        for j in range(k + formula.lo, k + formula.hi + 1):
            out = np.maximum(out, _rob_batch(states, formula.child, j, memo))
    elif isinstance(formula, Always):
        out = np.full(n, np.inf)
        for j in range(k + formula.lo, k + formula.hi + 1):
            out = np.minimum(out, _rob_batch(states, formula.child, j, memo))
    elif isinstance(formula, Until):
        out = np.full(n, -np.inf)
        prefix = np.full(n, np.inf)
        for j in range(k, k + formula.hi + 1):
            if j >= k + formula.lo:
                branch = np.minimum(_rob_batch(states, formula.right, j, memo), prefix)
                out = np.maximum(out, branch)
            if j < k + formula.hi:
                prefix = np.minimum(prefix, _rob_batch(states, formula.left, j, memo))
    else:
        raise TypeError(f"unknown formula node {type(formula).__name__}")
    memo[key] = out
    return out


# ---------------------------------------------------------------------------
# Interval semantics


def interval_robustness(interval: IntervalTrajectory, formula: Formula,
                        k: int = 0) -> RobustnessInterval:
    """Bracket on the robustness over every trajectory inside `interval`.

    The lower endpoint is a sound lower bound of the worst-case robustness;
    it is exact whenever the atoms evaluated at any one time index reference
    pairwise distinct coordinates with a single polarity each.
    """
    _check_horizon(formula, k, len(interval))
    lo, hi = _rob_interval(interval.lower.states, interval.upper.states, formula, k, {})
    return RobustnessInterval(float(lo), float(hi))


def _rob_interval(lower: np.ndarray, upper: np.ndarray, formula: Formula,
                  k: int, memo: dict) -> tuple[float, float]:
    key = (id(formula), k)
    cached = memo.get(key)
    if cached is not None:
        return cached
    if isinstance(formula, TrueFormula):
        out = (np.inf, np.inf)
    elif isinstance(formula, Atom):
        i = formula.coordinate
        if formula.relation == LE:
            out = (formula.threshold - upper[k, i], formula.threshold - lower[k, i])
        else:
            out = (lower[k, i] - formula.threshold, upper[k, i] - formula.threshold)
    elif isinstance(formula, Not):
        lo, hi = _rob_interval(lower, upper, formula.child, k, memo)
        out = (-hi, -lo)
    elif isinstance(formula, (And, Or)):
        l1, h1 = _rob_interval(lower, upper, formula.left, k, memo)
        l2, h2 = _rob_interval(lower, upper, formula.right, k, memo)
        pick = min if isinstance(formula, And) else max
        out = (pick(l1, l2), pick(h1, h2))
    elif isinstance(formula, (Eventually, Always)):
        pick = max if isinstance(formula, Eventually) else min
        lo, hi = (-np.inf, -np.inf) if isinstance(formula, Eventually) else (np.inf, np.inf)
        for j in range(k + formula.lo, k + formula.hi + 1):
            l, h = _rob_interval(lower, upper, formula.child, j, memo)
            lo, hi = pick(lo, l), pick(hi, h)
        out = (lo, hi)
    elif isinstance(formula, Until):
        lo, hi = -np.inf, -np.inf
        plo, phi = np.inf, np.inf
        for j in range(k, k + formula.hi + 1):
            if j >= k + formula.lo:
                rlo, rhi = _rob_interval(lower, upper, formula.right, j, memo)
                lo = max(lo, min(rlo, plo))
                hi = max(hi, min(rhi, phi))
            if j < k + formula.hi:
                llo, lhi = _rob_interval(lower, upper, formula.left, j, memo)
                plo, phi = min(plo, llo), min(phi, lhi)
        out = (lo, hi)
    else:
        raise TypeError(f"unknown formula node {type(formula).__name__}")
    memo[key] = out
    return out


# ---------------------------------------------------------------------------
# Smoothed semantics


def smooth_robustness(trajectory: Trajectory, formula: Formula, k: int = 0,
                      beta: float = 1000.0) -> tuple[float, np.ndarray]:
    """Log-sum-exp relaxation of the robustness and its exact gradient.

    Every min is replaced by softmin(v) = -log(sum(exp(-beta*v)))/beta and
    every max by its dual. Returns (value, d value / d states) where the
    gradient has the trajectory's (T+1, 5) shape. The relaxation error is
    bounded by `smoothing_gap_bound`.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    _check_horizon(formula, k, len(trajectory))
    value, grad = _smooth(trajectory.states, formula, k, beta, {})
    return float(value), grad


def _aggregate(entries: list[tuple[float, np.ndarray | None]], beta: float,
               mode: str, shape: tuple) -> tuple[float, np.ndarray]:
    """Softmin/softmax of (value, gradient) pairs; gradients may be None (zero)."""
    drop = math.inf if mode == "min" else -math.inf
    hit = -drop
    kept = [(v, g) for v, g in entries if v != drop]
    if not kept:
        return drop, np.zeros(shape)
    if any(v == hit for v, _ in kept):
        return hit, np.zeros(shape)
    values = np.array([v for v, _ in kept])
    sign = -1.0 if mode == "min" else 1.0
    shifted = sign * beta * (values - (values.min() if mode == "min" else values.max()))
    weights = np.exp(shifted)
    total = weights.sum()
    value = (values.min() if mode == "min" else values.max()) + sign * math.log(total) / beta
    grad = np.zeros(shape)
    for w, (_, g) in zip(weights / total, kept):
        if g is not None:
            grad += w * g
    return value, grad


def _atom_affine(formula: Formula) -> tuple[int, float, float] | None:
    """(coordinate, sign, offset) with robustness = sign*x[coordinate] + offset,
    for atoms and negated atoms; None otherwise."""
    negate = False
    while isinstance(formula, Not):
        negate = not negate
        formula = formula.child
    if not isinstance(formula, Atom):
        return None
    sign = -1.0 if formula.relation == LE else 1.0
    offset = formula.threshold if formula.relation == LE else -formula.threshold
    if negate:
        sign, offset = -sign, -offset
    return formula.coordinate, sign, offset


def _smooth_window_fast(states: np.ndarray, formula: Formula, k: int,
                        beta: float) -> tuple[float, np.ndarray] | None:
    """Vectorized softmin/softmax over a temporal window whose body is an
    atom (possibly negated); the dominant case in the synthesis loop."""
    affine = _atom_affine(formula.child)
    if affine is None:
        return None
    coord, sign, offset = affine
    idx = np.arange(k + formula.lo, k + formula.hi + 1)
    values = sign * states[idx, coord] + offset
    if not np.isfinite(values).all():
        return None  # the general path handles infinite entries
    agg_sign = -1.0 if isinstance(formula, Always) else 1.0
    shifted = agg_sign * beta * (values - (values.min() if agg_sign < 0 else values.max()))
    weights = np.exp(shifted)
    total = weights.sum()
    value = (values.min() if agg_sign < 0 else values.max()) + agg_sign * math.log(total) / beta
    grad = np.zeros(states.shape)
    grad[idx, coord] = sign * weights / total
    return value, grad


def _smooth(states: np.ndarray, formula: Formula, k: int, beta: float,
            memo: dict) -> tuple[float, np.ndarray | None]:
    key = (id(formula), k)
    cached = memo.get(key)
    if cached is not None:
        return cached
    shape = states.shape
    if isinstance(formula, TrueFormula):
        out = (math.inf, None)
    elif isinstance(formula, Atom):
        i = formula.coordinate
        grad = np.zeros(shape)
        if formula.relation == LE:
            value = formula.threshold - states[k, i]
            grad[k, i] = -1.0
        else:
            value = states[k, i] - formula.threshold
            grad[k, i] = 1.0
        out = (value, grad)
    elif isinstance(formula, Not):
        value, grad = _smooth(states, formula.child, k, beta, memo)
        out = (-value, None if grad is None else -grad)
    elif isinstance(formula, (And, Or)):
        entries = [_smooth(states, formula.left, k, beta, memo),
                   _smooth(states, formula.right, k, beta, memo)]
        out = _aggregate(entries, beta, "min" if isinstance(formula, And) else "max", shape)
    elif isinstance(formula, (Eventually, Always)):
        fast = _smooth_window_fast(states, formula, k, beta)
        if fast is not None:
            out = fast
        else:
            entries = [_smooth(states, formula.child, j, beta, memo)
                       for j in range(k + formula.lo, k + formula.hi + 1)]
            out = _aggregate(entries, beta, "max" if isinstance(formula, Eventually) else "min",
                             shape)
    elif isinstance(formula, Until):
        branches = []
        prefix: list[tuple[float, np.ndarray | None]] = []
        for j in range(k, k + formula.hi + 1):
            if j >= k + formula.lo:
                inner = [_smooth(states, formula.right, j, beta, memo)] + prefix
                branches.append(_aggregate(inner, beta, "min", shape))
            if j < k + formula.hi:
                prefix = prefix + [_smooth(states, formula.left, j, beta, memo)]
        out = _aggregate(branches, beta, "max", shape)
    else:
        raise TypeError(f"unknown formula node {type(formula).__name__}")
    memo[key] = out
    return out


def smoothing_gap_bound(formula: Formula, beta: float) -> float:
    """Sound bound on |smooth_robustness - robustness| for any trajectory.

    Per aggregation the log-sum-exp relaxation deviates by at most
    ln(arity)/beta on one side; deviations accumulate only across nested
    aggregations of the same orientation, which this recursion tracks.
    """
    below, above = _gap(formula, beta)
    return max(below, above)


def _gap(formula: Formula, beta: float) -> tuple[float, float]:
    if isinstance(formula, (TrueFormula, Atom)):
        return 0.0, 0.0
    if isinstance(formula, Not):
        below, above = _gap(formula.child, beta)
        return above, below
    if isinstance(formula, (And, Or)):
        b1, a1 = _gap(formula.left, beta)
        b2, a2 = _gap(formula.right, beta)
        below, above = max(b1, b2), max(a1, a2)
        if isinstance(formula, And):
            return below + math.log(2) / beta, above
        return below, above + math.log(2) / beta
    if isinstance(formula, (Eventually, Always)):
        below, above = _gap(formula.child, beta)
        window = formula.hi - formula.lo + 1
        if isinstance(formula, Always):
            return below + math.log(window) / beta, above
        return below, above + math.log(window) / beta
    if isinstance(formula, Until):
        b1, a1 = _gap(formula.left, beta)
        b2, a2 = _gap(formula.right, beta)
        inner_arity = formula.hi + 1
        window = formula.hi - formula.lo + 1
        below = max(b1, b2) + math.log(inner_arity) / beta
        above = max(a1, a2) + math.log(window) / beta
        return below, above
    raise TypeError(f"unknown formula node {type(formula).__name__}")
