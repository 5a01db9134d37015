"""Box reachability for the controlled SEIR dynamics.

Propagates a box of initial states and a box of rate parameters through
the Euler dynamics so that the result is guaranteed to contain every
pointwise trajectory. Two inclusion modes are provided:

* natural  -- the rate equations transcribed in interval arithmetic,
              bilinear and quotient terms taking their corner hulls;
* centered -- midpoint step plus an interval-Jacobian remainder
              (mean-value form over the joint state/parameter box).

Boxes are coarser than dependency-tracking set representations; a
diverging box saturates to +/-inf bounds rather than failing, so the
surrounding synthesis loop can observe the (useless but sound) result.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dynamics import (IDX_D, IDX_E, IDX_I, IDX_R, IDX_S, KINDS, SHIELD,
                       VACCINATION, ModelParams, simulate, step)
from .errors import ModelDomainError
from .intervals import Ival
from .mtl.trajectory import IntervalTrajectory, Trajectory

_DENOM_FLOOR = 1e-9

NATURAL = "natural"
CENTERED = "centered"
MODES = (NATURAL, CENTERED)


@dataclass(frozen=True)
class StateBox:
    """Componentwise box of states [I, E, S, R, D], millions."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != (5,) or hi.shape != (5,):
            raise ValueError("state box bounds must have shape (5,)")
        if np.any(lo > hi):
            raise ValueError("state box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_center(cls, center, halfwidth) -> "StateBox":
        center = np.asarray(center, dtype=float)
        halfwidth = np.asarray(halfwidth, dtype=float)
        return cls(center - halfwidth, center + halfwidth)

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def corners(self) -> np.ndarray:
        """All distinct corner states, shape (m, 5)."""
        axes = [sorted({self.lower[i], self.upper[i]}) for i in range(5)]
        return np.array(list(itertools.product(*axes)))


@dataclass(frozen=True)
class ParamBox:
    """Componentwise box of rate parameters."""

    lower: ModelParams
    upper: ModelParams

    def __post_init__(self):
        if np.any(self.lower.rates() > self.upper.rates()):
            raise ValueError("parameter box lower bound exceeds upper bound")
        if self.lower.n0 != self.upper.n0 or self.lower.ts != self.upper.ts:
            raise ValueError("n0 and ts must be identical on both bounds")

    @classmethod
    def from_center(cls, center: ModelParams, halfwidth) -> "ParamBox":
        halfwidth = np.asarray(halfwidth, dtype=float)
        lo = ModelParams.from_rates(center.rates() - halfwidth, center.n0, center.ts)
        hi = ModelParams.from_rates(center.rates() + halfwidth, center.n0, center.ts)
        return cls(lo, hi)

    @property
    def midpoint(self) -> ModelParams:
        mid = 0.5 * (self.lower.rates() + self.upper.rates())
        return ModelParams.from_rates(mid, self.lower.n0, self.lower.ts)

    def corner_rates(self) -> np.ndarray:
        """Distinct corners of (alpha, beta, epsilon, gamma, mu) with lam tied
        to mu, shape (m, 6)."""
        lo, hi = self.lower.rates(), self.upper.rates()
        axes = [sorted({lo[i], hi[i]}) for i in range(5)]  # alpha..mu
        corners = [list(c) + [c[4]] for c in itertools.product(*axes)]
        return np.array(corners)


@dataclass(frozen=True)
class DeltaProfile:
    """Per-step half-widths of an interval trajectory."""

    delta_k: np.ndarray  # max over dimensions of half the box width, per step
    delta_max: float

    def __post_init__(self):
        if np.any(self.delta_k < 0):
            raise ValueError("half-widths must be nonnegative")


def delta_profile(interval: IntervalTrajectory) -> DeltaProfile:
    half = 0.5 * interval.widths
    delta_k = half.max(axis=1)
    return DeltaProfile(delta_k, float(delta_k.max()))


def nominal_midpoint(interval: IntervalTrajectory) -> Trajectory:
    """Per-index midpoint of the interval trajectory (requires finite bounds)."""
    mid = 0.5 * (interval.lower.states + interval.upper.states)
    return Trajectory(mid, interval.lower.step)


def nominal_dynamic(box: StateBox, u: np.ndarray, params: ParamBox, T: int,
                    kind: str = VACCINATION, n_approx: float | None = None) -> Trajectory:
    """Trajectory simulated from the midpoint state with midpoint parameters."""
    return simulate(box.midpoint, u, params.midpoint, T, kind, n_approx=n_approx)


def _state_ivals(box: StateBox) -> list[Ival]:
    return [Ival(float(box.lower[i]), float(box.upper[i])) for i in range(5)]


def _param_ivals(params: ParamBox) -> list[Ival]:
    lo, hi = params.lower.rates(), params.upper.rates()
    return [Ival(float(lo[i]), float(hi[i])) for i in range(6)]


def _interval_rates(x: list[Ival], u: float, theta: list[Ival], kind: str,
                    n_approx: float | None) -> list[Ival]:
    # A transmission denominator interval that reaches zero makes the
    # quotient unbounded; Ival division then yields the (-inf, inf) hull,
    # which is the sound enclosure and keeps the propagation total.
    alpha, beta, eps, gamma, mu, lam = theta
    I, E, S, R = x[IDX_I], x[IDX_E], x[IDX_S], x[IDX_R]
    n_total = Ival.point(n_approx) if n_approx is not None else I + E + S + R
    denom = n_total + u * R if kind == SHIELD else n_total
    v = u if kind == VACCINATION else 0.0
    infection = beta * S * I / denom
    d_i = eps * E - (gamma + mu + alpha) * I
    d_e = infection - (mu + eps) * E
    d_s = lam * n_total - mu * S - infection - v
    d_r = gamma * I - mu * R + v
    d_d = -(d_i + d_e + d_s + d_r)
    return [d_i, d_e, d_s, d_r, d_d]


def _natural_step(box: StateBox, u: float, params: ParamBox, kind: str,
                  n_approx: float | None) -> StateBox:
    x = _state_ivals(box)
    theta = _param_ivals(params)
    ts = params.lower.ts
    rates = _interval_rates(x, u, theta, kind, n_approx)
    nxt = [x[i] + ts * rates[i] for i in range(5)]
    return StateBox(np.array([iv.lo for iv in nxt]), np.array([iv.hi for iv in nxt]))


def _interval_jacobians(x: list[Ival], u: float, theta: list[Ival], kind: str,
                        n_approx: float | None) -> tuple[list, list]:
    """Interval enclosures of d(rates)/dx (5x5) and d(rates)/dtheta (5x6)."""
    alpha, beta, eps, gamma, mu, lam = theta
    I, E, S, R = x[IDX_I], x[IDX_E], x[IDX_S], x[IDX_R]
    n_total = Ival.point(n_approx) if n_approx is not None else I + E + S + R
    denom = n_total + u * R if kind == SHIELD else n_total
    infection = beta * S * I / denom

    zero = Ival.point(0.0)
    one = Ival.point(1.0)
    dn = [zero] * 5 if n_approx is not None else [one, one, one, one, zero]
    ddenom = list(dn)
    if kind == SHIELD:
        ddenom[IDX_R] = ddenom[IDX_R] + u

    dinf = [-(infection / denom) * ddenom[j] for j in range(5)]
    dinf[IDX_I] = dinf[IDX_I] + beta * S / denom
    dinf[IDX_S] = dinf[IDX_S] + beta * I / denom

    jx = [[zero] * 5 for _ in range(5)]
    jx[IDX_I][IDX_I] = -(gamma + mu + alpha)
    jx[IDX_I][IDX_E] = eps
    for j in range(5):
        jx[IDX_E][j] = dinf[j]
        jx[IDX_S][j] = lam * dn[j] - dinf[j]
    jx[IDX_E][IDX_E] = jx[IDX_E][IDX_E] - (mu + eps)
    jx[IDX_S][IDX_S] = jx[IDX_S][IDX_S] - mu
    jx[IDX_R][IDX_I] = gamma
    jx[IDX_R][IDX_R] = -mu
    for j in range(5):
        jx[IDX_D][j] = -(jx[IDX_I][j] + jx[IDX_E][j] + jx[IDX_S][j] + jx[IDX_R][j])

    si_over_denom = S * I / denom
    jt = [[zero] * 6 for _ in range(5)]
    jt[IDX_I][0] = -I  # alpha
    jt[IDX_I][2] = E  # epsilon
    jt[IDX_I][3] = -I  # gamma
    jt[IDX_I][4] = -I  # mu
    jt[IDX_E][1] = si_over_denom  # beta
    jt[IDX_E][2] = -E
    jt[IDX_E][4] = -E
    jt[IDX_S][1] = -si_over_denom
    jt[IDX_S][4] = -S
    jt[IDX_S][5] = n_total  # lam
    jt[IDX_R][3] = I
    jt[IDX_R][4] = -R
    for p in range(6):
        jt[IDX_D][p] = -(jt[IDX_I][p] + jt[IDX_E][p] + jt[IDX_S][p] + jt[IDX_R][p])
    return jx, jt


def _centered_step(box: StateBox, u: float, params: ParamBox, kind: str,
                   n_approx: float | None) -> StateBox:
    mid_x = box.midpoint
    mid_theta = params.midpoint
    center = step(mid_x, u, mid_theta, kind, n_approx=n_approx)
    ts = params.lower.ts

    x = _state_ivals(box)
    theta = _param_ivals(params)
    jx, jt = _interval_jacobians(x, u, theta, kind, n_approx)

    dev_x = [Ival(float(box.lower[j] - mid_x[j]), float(box.upper[j] - mid_x[j]))
             for j in range(5)]
    theta_lo, theta_hi = params.lower.rates(), params.upper.rates()
    mid_rates = mid_theta.rates()
    dev_t = [Ival(float(theta_lo[p] - mid_rates[p]), float(theta_hi[p] - mid_rates[p]))
             for p in range(6)]

    lower = np.empty(5)
    upper = np.empty(5)
    for i in range(5):
        total = Ival.point(float(center[i]))
        for j in range(5):
            # step Jacobian row: identity plus ts * rate Jacobian
            coeff = ts * jx[i][j] + (1.0 if i == j else 0.0)
            total = total + coeff * dev_x[j]
        for p in range(6):
            total = total + (ts * jt[i][p]) * dev_t[p]
        lower[i], upper[i] = total.lo, total.hi
    return StateBox(lower, upper)


_UNBOUNDED = None  # lazily built below


def _unbounded_box() -> StateBox:
    return StateBox(np.full(5, -np.inf), np.full(5, np.inf))


def interval_step(box: StateBox, u: float, params: ParamBox, kind: str = VACCINATION,
                  mode: str = NATURAL, n_approx: float | None = None) -> StateBox:
    """One-day box update guaranteed to contain step(x, u, theta) for every
    x in `box` and theta in `params`. A box that has already diverged to
    infinite bounds is absorbed into the unbounded hull."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if u < 0:
        raise ValueError("control value must be nonnegative")
    if not (np.isfinite(box.lower).all() and np.isfinite(box.upper).all()):
        return _unbounded_box()
    try:
        if mode == NATURAL:
            return _natural_step(box, u, params, kind, n_approx)
        return _centered_step(box, u, params, kind, n_approx)
    except ValueError:
        # inf - inf inside the interval arithmetic: the box is diverging
        # through the float range; saturate soundly.
        return _unbounded_box()


def propagate(box: StateBox, u: np.ndarray, params: ParamBox, T: int,
              kind: str = VACCINATION, mode: str = NATURAL,
              n_approx: float | None = None) -> IntervalTrajectory:
    """Iterate `interval_step` for T days; element 0 is the initial box."""
    u = np.asarray(u, dtype=float)
    if len(u) < T:
        raise ValueError(f"control sequence of length {len(u)} is shorter than T={T}")
    lower = np.empty((T + 1, 5))
    upper = np.empty((T + 1, 5))
    lower[0], upper[0] = box.lower, box.upper
    current = box
    for k in range(T):
        try:
            current = interval_step(current, float(u[k]), params, kind, mode, n_approx)
        except ModelDomainError as exc:
            raise ModelDomainError(f"interval propagation failed at step {k}: {exc}") from exc
        lower[k + 1], upper[k + 1] = current.lower, current.upper
    ts = params.lower.ts
    return IntervalTrajectory(Trajectory(lower, ts), Trajectory(upper, ts))


# ---------------------------------------------------------------------------
# Monte-Carlo sampling


def simulate_batch(x0: np.ndarray, u: np.ndarray, rates: np.ndarray, T: int,
                   kind: str = VACCINATION, ts: float = 1.0,
                   n_approx: float | None = None) -> np.ndarray:
    """Vectorized Euler rollout: x0 (n,5), rates (n,6) -> states (n, T+1, 5)."""
    x0 = np.asarray(x0, dtype=float)
    rates = np.asarray(rates, dtype=float)
    u = np.asarray(u, dtype=float)
    n = x0.shape[0]
    states = np.empty((n, T + 1, 5))
    states[:, 0] = x0
    alpha, beta, eps, gamma, mu, lam = (rates[:, p] for p in range(6))
    for k in range(T):
        x = states[:, k]
        I, E, S, R = x[:, IDX_I], x[:, IDX_E], x[:, IDX_S], x[:, IDX_R]
        n_total = np.full(n, n_approx) if n_approx is not None else I + E + S + R
        denom = n_total + u[k] * R if kind == SHIELD else n_total
        if np.any(denom <= _DENOM_FLOOR):
            bad = int(np.argmax(denom <= _DENOM_FLOOR))
            raise ModelDomainError(
                f"sample {bad}: transmission denominator at or below floor at step {k}")
        v = u[k] if kind == VACCINATION else 0.0
        infection = beta * S * I / denom
        d_i = eps * E - (gamma + mu + alpha) * I
        d_e = infection - (mu + eps) * E
        d_s = lam * n_total - mu * S - infection - v
        d_r = gamma * I - mu * R + v
        d_d = -(d_i + d_e + d_s + d_r)
        states[:, k + 1] = x + ts * np.stack([d_i, d_e, d_s, d_r, d_d], axis=1)
        if not np.isfinite(states[:, k + 1]).all():
            raise ModelDomainError(f"batch simulation blew up at step {k}")
    return states


def sample_initial_conditions(box: StateBox, params: ParamBox, n: int, seed: int,
                              include_corners: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """n (state, rates) pairs drawn from the boxes: every distinct corner of
    the joint box first (when requested and within budget), the remainder
    uniform with one deterministic substream per sample index."""
    x_corners = box.corners()
    t_corners = params.corner_rates()
    pairs_x, pairs_t = [], []
    if include_corners:
        joint = [(x, t) for x in x_corners for t in t_corners]
        joint = joint[:n]
        pairs_x = [x for x, _ in joint]
        pairs_t = [t for _, t in joint]
    lo_x, hi_x = box.lower, box.upper
    lo_t, hi_t = params.lower.rates(), params.upper.rates()
    for i in range(len(pairs_x), n):
        rng = np.random.default_rng([seed, i])
        x = lo_x + rng.random(5) * (hi_x - lo_x)
        t = lo_t + rng.random(6) * (hi_t - lo_t)
        t[5] = t[4]  # birth rate tied to natural death rate
        pairs_x.append(x)
        pairs_t.append(t)
    return np.array(pairs_x), np.array(pairs_t)


def sample_trajectories(box: StateBox, u: np.ndarray, params: ParamBox, T: int,
                        n: int, seed: int, kind: str = VACCINATION,
                        include_corners: bool = True) -> list[Trajectory]:
    """n simulations with (x0, theta) drawn from the boxes; deterministic
    for a fixed seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x0s, rate_rows = sample_initial_conditions(box, params, n, seed, include_corners)
    states = simulate_batch(x0s, u, rate_rows, T, kind, ts=params.lower.ts)
    return [Trajectory(states[i], params.lower.ts) for i in range(n)]
