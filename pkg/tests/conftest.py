"""Shared fixtures and the independent semantics oracle.

The oracle transcribes the recursive robustness definition literally and
on its own: only negation, disjunction, and bounded-until are primitive;
conjunction and the derived temporal operators are rewritten through
their defining identities. It shares no code with the package.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from episynth.dynamics import ModelParams, make_state
from episynth.mtl import (Always, And, Atom, Eventually, Formula, Not, Or,
                          Trajectory, TrueFormula, Until)
from episynth.reach import ParamBox, StateBox

# ---------------------------------------------------------------------------
# Independent oracle


def oracle_robustness(states: np.ndarray, formula: Formula, k: int) -> float:
    if isinstance(formula, TrueFormula):
        return math.inf
    if isinstance(formula, Atom):
        value = states[k][formula.coordinate]
        if formula.relation == "<=":
            return formula.threshold - value
        return value - formula.threshold
    if isinstance(formula, Not):
        return -oracle_robustness(states, formula.child, k)
    if isinstance(formula, Or):
        return max(oracle_robustness(states, formula.left, k),
                   oracle_robustness(states, formula.right, k))
    if isinstance(formula, And):
        # a and b == not (not a or not b)
        return oracle_robustness(states, Not(Or(Not(formula.left), Not(formula.right))), k)
    if isinstance(formula, Eventually):
        return oracle_robustness(
            states, Until(TrueFormula(), formula.child, formula.lo, formula.hi), k)
    if isinstance(formula, Always):
        return oracle_robustness(
            states, Not(Eventually(Not(formula.child), formula.lo, formula.hi)), k)
    if isinstance(formula, Until):
        best = -math.inf
        for kp in range(k + formula.lo, k + formula.hi + 1):
            branch = oracle_robustness(states, formula.right, kp)
            for kpp in range(k, kp):
                branch = min(branch, oracle_robustness(states, formula.left, kpp))
            best = max(best, branch)
        return best
    raise TypeError(type(formula).__name__)


def oracle_boolean(states: np.ndarray, formula: Formula, k: int) -> bool:
    if isinstance(formula, TrueFormula):
        return True
    if isinstance(formula, Atom):
        value = states[k][formula.coordinate]
        return value <= formula.threshold if formula.relation == "<=" \
            else value >= formula.threshold
    if isinstance(formula, Not):
        return not oracle_boolean(states, formula.child, k)
    if isinstance(formula, Or):
        return oracle_boolean(states, formula.left, k) or \
            oracle_boolean(states, formula.right, k)
    if isinstance(formula, And):
        return oracle_boolean(states, Not(Or(Not(formula.left), Not(formula.right))), k)
    if isinstance(formula, Eventually):
        return oracle_boolean(
            states, Until(TrueFormula(), formula.child, formula.lo, formula.hi), k)
    if isinstance(formula, Always):
        return oracle_boolean(
            states, Not(Eventually(Not(formula.child), formula.lo, formula.hi)), k)
    if isinstance(formula, Until):
        for kp in range(k + formula.lo, k + formula.hi + 1):
            if oracle_boolean(states, formula.right, kp) and \
                    all(oracle_boolean(states, formula.left, kpp) for kpp in range(k, kp)):
                return True
        return False
    raise TypeError(type(formula).__name__)


# ---------------------------------------------------------------------------
# Random instance generators


def random_formula(rng: np.random.Generator, depth: int = 3,
                   max_bound: int = 4) -> Formula:
    """Random well-formed formula of the given maximum operator depth."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.05:
            return TrueFormula()
        coordinate = int(rng.integers(0, 5))
        relation = "<=" if rng.random() < 0.5 else ">="
        threshold = float(np.round(rng.uniform(-1.0, 11.0), 3))
        return Atom(coordinate, relation, threshold)
    kind = rng.integers(0, 6)
    if kind == 0:
        return Not(random_formula(rng, depth - 1, max_bound))
    lo = int(rng.integers(0, max_bound))
    hi = int(rng.integers(lo, max_bound + 1))
    if kind == 1:
        return And(random_formula(rng, depth - 1, max_bound),
                   random_formula(rng, depth - 1, max_bound))
    if kind == 2:
        return Or(random_formula(rng, depth - 1, max_bound),
                  random_formula(rng, depth - 1, max_bound))
    if kind == 3:
        return Eventually(random_formula(rng, depth - 1, max_bound), lo, hi)
    if kind == 4:
        return Always(random_formula(rng, depth - 1, max_bound), lo, hi)
    return Until(random_formula(rng, depth - 1, max_bound),
                 random_formula(rng, depth - 1, max_bound), lo, hi)


def random_trajectory(rng: np.random.Generator, length: int) -> Trajectory:
    return Trajectory(rng.uniform(0.0, 10.0, size=(length, 5)))


# ---------------------------------------------------------------------------
# Scenario building blocks (Lombardy early-outbreak estimates)


LOMBARDY_MU = 1.0 / 30295.0


def lombardy_params() -> ModelParams:
    return ModelParams(alpha=0.006, beta=0.75, epsilon=0.2, gamma=0.2,
                       mu=LOMBARDY_MU, n0=10.0, ts=1.0)


def lombardy_param_box(scale: float = 1.0) -> ParamBox:
    half = np.array([0.001, 0.001, 0.001, 0.001, 0.0, 0.0]) * scale
    return ParamBox.from_center(lombardy_params(), half)


def initial_state_box(scale: float = 1.0) -> StateBox:
    center = make_state(I=0.001, E=0.02, S=9.979)
    half = np.array([0.001, 0.001, 0.001, 0.0, 0.0]) * scale
    return StateBox.from_center(center, half)


QUICK_SCENARIO_TEMPLATE = """\
[model]
kind = {kind}
ts = 1.0
n0 = 10.0

[params]
alpha = 0.006 +- 0.001
beta = 0.75 +- 0.001
epsilon = 0.2 +- 0.001
gamma = 0.2 +- 0.001
mu = 3.300874731803928e-05
lambda = 3.300874731803928e-05

[initial_state]
I = 0.001 +- 0.001
E = 0.02 +- 0.001
S = 9.979 +- 0.001
R = 0
D = 0

[spec]
formula = {spec}

[horizon]
days = {horizon}

[control]
u_max = {u_max}

[solver]
beta_schedule = 100, 1000
penalty_schedule = 1e3, 1e5
max_inner_iterations = 120
restarts = 2
refine_steps = 2

[seed]
value = {seed}
"""


def quick_scenario_text(spec="G[0,25](I <= 0.03) & F[10,25](R >= 1)",
                        horizon=25, kind="vaccination", u_max="1.0",
                        seed=7) -> str:
    return QUICK_SCENARIO_TEMPLATE.format(kind=kind, spec=spec, horizon=horizon,
                                          u_max=u_max, seed=seed)


@pytest.fixture(scope="session")
def params():
    return lombardy_params()


@pytest.fixture(scope="session")
def param_box():
    return lombardy_param_box()


@pytest.fixture(scope="session")
def x0_box():
    return initial_state_box()


@pytest.fixture(scope="session")
def x0_mid():
    return make_state(I=0.001, E=0.02, S=9.979)
