"""Boolean/quantitative/interval/smooth semantics against independent oracles."""
import math

import numpy as np
import pytest

from episynth.errors import HorizonError
from episynth.mtl import (Always, Eventually, IntervalTrajectory, Not,
                          Trajectory, TrueFormula, Until, eval_boolean,
                          interval_robustness, max_aggregation_arity, parse,
                          robustness, robustness_batch, smooth_robustness,
                          smoothing_gap_bound)

from conftest import (oracle_boolean, oracle_robustness, random_formula,
                      random_trajectory)


def constant_trajectory(state, length):
    return Trajectory(np.tile(np.asarray(state, dtype=float), (length, 1)))


def test_robustness_constant_always():
    traj = constant_trajectory([0.2, 0, 9.8, 0, 0], 12)
    assert robustness(traj, parse("G[0,10](I <= 0.3)")) == pytest.approx(0.1, abs=1e-15)


def test_robustness_violated_always():
    states = np.zeros((3, 5))
    states[:, 0] = [0.1, 0.2, 0.4]
    traj = Trajectory(states)
    assert robustness(traj, parse("G[0,2](I <= 0.3)")) == pytest.approx(-0.1, abs=1e-15)
    assert eval_boolean(traj, parse("G[0,2](I <= 0.3)")) is False


def test_boolean_constant():
    traj = constant_trajectory([0.2, 0, 9.8, 0, 0], 12)
    assert eval_boolean(traj, parse("G[0,10](I <= 0.3)")) is True


def test_true_formula_robustness():
    traj = constant_trajectory([0.2, 0, 9.8, 0, 0], 3)
    assert robustness(traj, TrueFormula()) == math.inf
    assert robustness(traj, Not(TrueFormula())) == -math.inf


def test_random_instances_match_oracle():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 500:
        formula = random_formula(rng, depth=3)
        horizon = formula.horizon()
        if horizon > 12:
            continue
        traj = random_trajectory(rng, horizon + int(rng.integers(1, 4)))
        value = robustness(traj, formula, 0)
        expected = oracle_robustness(traj.states, formula, 0)
        assert value == pytest.approx(expected, abs=1e-12)
        if abs(value) > 1e-12 and math.isfinite(value):
            assert eval_boolean(traj, formula, 0) == (value > 0)
            assert oracle_boolean(traj.states, formula, 0) == (value > 0)
        checked += 1


def test_negation_duality_exact():
    rng = np.random.default_rng(8)
    for _ in range(200):
        formula = random_formula(rng, depth=2)
        traj = random_trajectory(rng, formula.horizon() + 2)
        assert robustness(traj, Not(formula), 0) == -robustness(traj, formula, 0)


def test_derived_operator_identities():
    rng = np.random.default_rng(9)
    for _ in range(200):
        child = random_formula(rng, depth=1)
        lo = int(rng.integers(0, 4))
        hi = int(rng.integers(lo, 5))
        traj = random_trajectory(rng, hi + child.horizon() + 2)
        eventually = robustness(traj, Eventually(child, lo, hi), 0)
        until_form = robustness(traj, Until(TrueFormula(), child, lo, hi), 0)
        assert eventually == until_form
        always = robustness(traj, Always(child, lo, hi), 0)
        dual = robustness(traj, Not(Eventually(Not(child), lo, hi)), 0)
        assert always == dual


def test_time_shift():
    rng = np.random.default_rng(10)
    for _ in range(100):
        formula = random_formula(rng, depth=2)
        k = int(rng.integers(0, 4))
        traj = random_trajectory(rng, k + formula.horizon() + 2)
        assert robustness(traj, formula, k) == robustness(traj.suffix(k), formula, 0)
        assert eval_boolean(traj, formula, k) == eval_boolean(traj.suffix(k), formula, 0)


def test_horizon_overflow_raises():
    traj = constant_trajectory([0.2, 0, 9.8, 0, 0], 5)
    with pytest.raises(HorizonError):
        robustness(traj, parse("G[0,10](I <= 0.3)"))
    with pytest.raises(HorizonError):
        eval_boolean(traj, parse("G[0,2](I <= 0.3)"), 3)
    with pytest.raises(HorizonError):
        robustness(traj, parse("I <= 1"), -1)


def test_batch_matches_scalar():
    rng = np.random.default_rng(11)
    formula = parse("G[0,6](I <= 5) & F[1,4](R >= 3)")
    stack = rng.uniform(0, 10, size=(40, 9, 5))
    batch = robustness_batch(stack, formula, 0)
    for i in range(40):
        assert batch[i] == robustness(Trajectory(stack[i]), formula, 0)


# ---------------------------------------------------------------------------
# Interval semantics


def test_interval_constant_box():
    length = 7
    lower = np.zeros((length, 5))
    upper = np.zeros((length, 5))
    lower[:, 0], upper[:, 0] = 0.1, 0.2
    interval = IntervalTrajectory(Trajectory(lower), Trajectory(upper))
    result = interval_robustness(interval, parse("G[0,5](I <= 0.3)"))
    assert result.lo == pytest.approx(0.1, abs=1e-15)
    assert result.hi == pytest.approx(0.2, abs=1e-15)


def test_interval_degenerate_equals_point():
    rng = np.random.default_rng(12)
    for _ in range(50):
        formula = random_formula(rng, depth=2)
        traj = random_trajectory(rng, formula.horizon() + 2)
        interval = IntervalTrajectory(traj, traj)
        result = interval_robustness(interval, formula, 0)
        point = robustness(traj, formula, 0)
        assert result.lo == point == result.hi


def test_interval_malformed_raises():
    lower = np.ones((3, 5))
    upper = np.zeros((3, 5))
    with pytest.raises(ValueError, match="malformed"):
        IntervalTrajectory(Trajectory(lower), Trajectory(upper))


def test_interval_selection_sampling_oracle():
    # single-polarity formula: the lower endpoint is exact, so dense
    # sampling must approach it from above
    rng = np.random.default_rng(13)
    length = 12
    formula = parse("G[0,8](I <= 6) & G[0,8](D <= 4) & F[2,5](R >= 3)")
    lower = rng.uniform(0, 5, size=(length, 5))
    upper = lower + rng.uniform(0, 0.5, size=(length, 5))
    interval = IntervalTrajectory(Trajectory(lower), Trajectory(upper))
    result = interval_robustness(interval, formula, 0)

    samples = lower[None] + rng.random((10_000, length, 5)) * (upper - lower)[None]
    rhos = robustness_batch(samples, formula, 0)
    assert result.lo <= rhos.min() + 1e-12
    assert rhos.max() <= result.hi + 1e-12
    assert rhos.min() - result.lo <= 5e-3


def test_interval_containment_random_formulas():
    rng = np.random.default_rng(14)
    for _ in range(40):
        formula = random_formula(rng, depth=2)
        length = formula.horizon() + 2
        lower = rng.uniform(0, 8, size=(length, 5))
        upper = lower + rng.uniform(0, 1, size=(length, 5))
        interval = IntervalTrajectory(Trajectory(lower), Trajectory(upper))
        result = interval_robustness(interval, formula, 0)
        samples = lower[None] + rng.random((200, length, 5)) * (upper - lower)[None]
        rhos = robustness_batch(samples, formula, 0)
        finite = np.isfinite(rhos)
        assert np.all(rhos[finite] >= result.lo - 1e-12)
        assert np.all(rhos[finite] <= result.hi + 1e-12)


# ---------------------------------------------------------------------------
# Smooth semantics


def test_smooth_single_atom_exact():
    traj = constant_trajectory([0.2, 0, 9.8, 0, 0], 3)
    for beta in (1.0, 100.0, 1e6):
        value, grad = smooth_robustness(traj, parse("I <= 0.3"), 0, beta)
        assert value == pytest.approx(0.1, abs=1e-15)
        expected = np.zeros((3, 5))
        expected[0, 0] = -1.0
        assert np.array_equal(grad, expected)


def test_smooth_equal_aggregands_bracket():
    traj = constant_trajectory([0.2, 0, 9.8, 0, 0], 12)
    formula = parse("G[0,10](I <= 0.3)")
    exact = robustness(traj, formula)
    for beta in (10.0, 100.0, 1000.0):
        value, _ = smooth_robustness(traj, formula, 0, beta)
        # all 11 aggregands equal: softmin sits exactly ln(11)/beta below
        assert value == pytest.approx(exact - math.log(11) / beta, abs=1e-12)
    value, _ = smooth_robustness(traj, formula, 0, 1e6)
    assert value == pytest.approx(exact, abs=1e-5)


def test_smooth_gradient_matches_finite_differences():
    rng = np.random.default_rng(15)
    beta = 1000.0
    checked = 0
    while checked < 30:
        formula = random_formula(rng, depth=3)
        if formula.horizon() > 10:
            continue
        length = formula.horizon() + 2
        traj = random_trajectory(rng, length)
        value, grad = smooth_robustness(traj, formula, 0, beta)
        if not math.isfinite(value):
            continue
        h = 1e-6
        for _ in range(10):
            k = int(rng.integers(0, length))
            i = int(rng.integers(0, 5))
            bump = np.zeros((length, 5))
            bump[k, i] = h
            up, _ = smooth_robustness(Trajectory(traj.states + bump), formula, 0, beta)
            dn, _ = smooth_robustness(Trajectory(traj.states - bump), formula, 0, beta)
            fd = (up - dn) / (2 * h)
            assert grad[k, i] == pytest.approx(fd, abs=1e-5, rel=1e-5)
        checked += 1


def test_smooth_error_within_gap_bound():
    rng = np.random.default_rng(16)
    checked = 0
    while checked < 150:
        formula = random_formula(rng, depth=3)
        if formula.horizon() > 10:
            continue
        traj = random_trajectory(rng, formula.horizon() + 2)
        exact = robustness(traj, formula, 0)
        if not math.isfinite(exact):
            continue
        for beta in (100.0, 1000.0):
            value, _ = smooth_robustness(traj, formula, 0, beta)
            assert abs(value - exact) <= smoothing_gap_bound(formula, beta) + 1e-12
            # the single-arity form also holds on this suite
            arity = max_aggregation_arity(formula)
            assert abs(value - exact) <= math.log(max(arity, 2)) / beta + 1e-12
        checked += 1


def test_smooth_window_fast_path_matches_generic():
    # temporal windows over (possibly negated) atoms take a vectorized
    # shortcut; conjoining the body with `true` (a semantic no-op) makes
    # the body non-atomic and forces the generic recursion instead
    from episynth.mtl import And
    rng = np.random.default_rng(17)
    for _ in range(40):
        coordinate = int(rng.integers(0, 5))
        relation = "<=" if rng.random() < 0.5 else ">="
        atom = parse(f"{'IESRD'[coordinate]} {relation} {rng.uniform(0, 10):.3f}")
        body = Not(atom) if rng.random() < 0.5 else atom
        lo = int(rng.integers(0, 4))
        hi = int(rng.integers(lo, 8))
        make = Always if rng.random() < 0.5 else Eventually
        fast_node = make(body, lo, hi)
        slow_node = make(And(body, TrueFormula()), lo, hi)
        traj = random_trajectory(rng, hi + 2)
        fast_value, fast_grad = smooth_robustness(traj, fast_node, 0, 750.0)
        slow_value, slow_grad = smooth_robustness(traj, slow_node, 0, 750.0)
        assert fast_value == pytest.approx(slow_value, abs=1e-12)
        assert fast_grad == pytest.approx(slow_grad, abs=1e-12)


def test_smooth_overflow_guarded():
    states = np.full((6, 5), 1e3)
    traj = Trajectory(states)
    formula = parse("G[0,4](I <= 0.3) | F[0,3](R >= 2e3)")
    value, grad = smooth_robustness(traj, formula, 0, 1e6)
    assert math.isfinite(value)
    assert np.isfinite(grad).all()


def test_smooth_rejects_bad_beta():
    traj = constant_trajectory([0.2, 0, 9.8, 0, 0], 3)
    with pytest.raises(ValueError):
        smooth_robustness(traj, parse("I <= 0.3"), 0, 0.0)
