"""SEIR dynamics with vaccination or shield-immunity control.

States are 5-vectors [I, E, S, R, D] in millions of persons. The two
per-day rate models are:

vaccination (control V, millions of persons/day):
    dI = eps*E - (gamma + mu + alpha)*I
    dE = beta*S*I/N - (mu + eps)*E
    dS = lam*N - mu*S - beta*S*I/N - V
    dR = gamma*I - mu*R + V
    dD = -(dI + dE + dS + dR)

shield immunity (control chi, dimensionless):
    same as vaccination with V = 0 and the transmission denominator
    N replaced by N + chi*R.

N = S + E + I + R is recomputed from the current state unless a constant
approximation is supplied. dD is the negated sum of the other rates, so
the five-compartment total is conserved exactly. Discretization is a
forward Euler step of `ts` days.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModelDomainError
from .mtl.trajectory import Trajectory

VACCINATION = "vaccination"
SHIELD = "shield"
KINDS = (VACCINATION, SHIELD)

COMPARTMENTS = ("I", "E", "S", "R", "D")
IDX_I, IDX_E, IDX_S, IDX_R, IDX_D = range(5)

PARAM_NAMES = ("alpha", "beta", "epsilon", "gamma", "mu", "lam")

_DENOM_FLOOR = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Rate constants (per day) plus population scale and sample period.

    `lam` (birth rate) must equal `mu` (natural death rate); omit it to
    have it filled in from `mu`.
    """

    alpha: float  # disease-induced fatality rate
    beta: float  # transmission rate
    epsilon: float  # progression rate, exposed -> infectious
    gamma: float  # recovery rate
    mu: float  # natural death rate
    lam: float | None = None  # birth rate; defaults to mu
    n0: float = 10.0  # initial total population, millions
    ts: float = 1.0  # sample period, days

    def __post_init__(self):
        if self.lam is None:
            object.__setattr__(self, "lam", self.mu)
        for name in PARAM_NAMES:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.lam != self.mu:
            raise ValueError("birth rate lam must equal natural death rate mu")
        if self.n0 <= 0:
            raise ValueError("n0 must be positive")
        if self.ts <= 0:
            raise ValueError("ts must be positive")

    def rates(self) -> np.ndarray:
        """The six rates as an array ordered like PARAM_NAMES."""
        return np.array([self.alpha, self.beta, self.epsilon,
                         self.gamma, self.mu, self.lam])

    @classmethod
    def from_rates(cls, rates, n0: float, ts: float) -> "ModelParams":
        alpha, beta, epsilon, gamma, mu, lam = (float(v) for v in rates)
        return cls(alpha=alpha, beta=beta, epsilon=epsilon, gamma=gamma,
                   mu=mu, lam=lam, n0=n0, ts=ts)


def make_state(I=0.0, E=0.0, S=0.0, R=0.0, D=0.0) -> np.ndarray:
    """State vector [I, E, S, R, D] in millions."""
    return np.array([I, E, S, R, D], dtype=float)


@dataclass(frozen=True)
class ControlSignal:
    """Per-day control values over the horizon.

    Vaccination values are millions of persons/day; shield values are
    dimensionless. Every value must lie in [0, u_max].
    """

    kind: str
    values: np.ndarray
    u_max: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        values = np.asarray(self.values, dtype=float)
        if self.u_max <= 0:
            raise ValueError("u_max must be positive")
        if np.any(values < 0) or np.any(values > self.u_max):
            raise ValueError("control values must lie in [0, u_max]")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


def _transmission_denominator(x: np.ndarray, u: float, kind: str,
                              n_approx: float | None) -> float:
    n = n_approx if n_approx is not None else float(x[IDX_I] + x[IDX_E] + x[IDX_S] + x[IDX_R])
    denom = n + u * x[IDX_R] if kind == SHIELD else n
    if denom <= _DENOM_FLOOR:
        raise ModelDomainError(
            f"transmission denominator {denom:.3e} at or below floor {_DENOM_FLOOR:.0e}")
    return denom


def derivative(x: np.ndarray, u: float, params: ModelParams, kind: str = VACCINATION,
               n_approx: float | None = None) -> np.ndarray:
    """Per-day rate of change of the state under control value `u`."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if not np.isfinite(x).all() or not np.isfinite(u):
        raise ModelDomainError("non-finite state or control")
    if u < 0:
        raise ValueError("control value must be nonnegative")
    I, E, S, R = x[IDX_I], x[IDX_E], x[IDX_S], x[IDX_R]
    n = n_approx if n_approx is not None else I + E + S + R
    denom = _transmission_denominator(x, u, kind, n_approx)
    v = u if kind == VACCINATION else 0.0
    infection = params.beta * S * I / denom
    d_i = params.epsilon * E - (params.gamma + params.mu + params.alpha) * I
    d_e = infection - (params.mu + params.epsilon) * E
    d_s = params.lam * n - params.mu * S - infection - v
    d_r = params.gamma * I - params.mu * R + v
    d_d = -(d_i + d_e + d_s + d_r)
    return np.array([d_i, d_e, d_s, d_r, d_d])


def step(x: np.ndarray, u: float, params: ModelParams, kind: str = VACCINATION,
         ts: float | None = None, substeps: int = 1,
         n_approx: float | None = None) -> np.ndarray:
    """Forward Euler update over one sample period (`ts` defaults to params.ts)."""
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    h = (params.ts if ts is None else ts) / substeps
    out = np.asarray(x, dtype=float)
    for _ in range(substeps):
        out = out + h * derivative(out, u, params, kind, n_approx)
    return out


def simulate(x0: np.ndarray, u: np.ndarray, params: ModelParams,
             T: int, kind: str = VACCINATION, substeps: int = 1,
             n_approx: float | None = None) -> Trajectory:
    """Iterate `step` for T days from x0 under the control sequence u[0..T-1].

    Aborts with the offending step index if the state becomes non-finite.
    Negative compartments are permitted (the rate equations are applied
    verbatim); inspect them with `validity_report`.
    """
    u = np.asarray(u, dtype=float)
    if len(u) < T:
        raise ValueError(f"control sequence of length {len(u)} is shorter than T={T}")
    states = np.empty((T + 1, 5))
    states[0] = x0
    for k in range(T):
        try:
            states[k + 1] = step(states[k], float(u[k]), params, kind,
                                 substeps=substeps, n_approx=n_approx)
        except ModelDomainError as exc:
            raise ModelDomainError(f"simulation failed at step {k}: {exc}") from exc
        if not np.isfinite(states[k + 1]).all():
            raise ModelDomainError(f"simulation blew up at step {k}")
    return Trajectory(states, params.ts)


def validity_report(trajectory: Trajectory) -> list[tuple[int, str]]:
    """(step index, compartment name) pairs where a state entry is negative."""
    rows, cols = np.nonzero(trajectory.states < 0)
    return [(int(k), COMPARTMENTS[c]) for k, c in zip(rows, cols)]


def jacobians(x: np.ndarray, u: float, params: ModelParams, kind: str = VACCINATION,
              ts: float | None = None, substeps: int = 1,
              n_approx: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Exact Jacobians of `step`: (d step/d x, d step/d u) with shapes (5,5), (5,)."""
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    h = (params.ts if ts is None else ts) / substeps
    a_total = np.eye(5)
    b_total = np.zeros(5)
    state = np.asarray(x, dtype=float)
    for _ in range(substeps):
        df_dx, df_du = _rate_jacobians(state, u, params, kind, n_approx)
        a_sub = np.eye(5) + h * df_dx
        b_sub = h * df_du
        # chain rule through the substep composition
        a_total = a_sub @ a_total
        b_total = a_sub @ b_total + b_sub
        state = state + h * derivative(state, u, params, kind, n_approx)
    return a_total, b_total


def _rate_jacobians(x: np.ndarray, u: float, params: ModelParams, kind: str,
                    n_approx: float | None) -> tuple[np.ndarray, np.ndarray]:
    I, E, S, R = x[IDX_I], x[IDX_E], x[IDX_S], x[IDX_R]
    denom = _transmission_denominator(x, u, kind, n_approx)
    infection = params.beta * S * I / denom

    # d(N)/dx and d(denominator)/dx per state coordinate
    if n_approx is None:
        dn = np.array([1.0, 1.0, 1.0, 1.0, 0.0])
    else:
        dn = np.zeros(5)
    ddenom = dn.copy()
    if kind == SHIELD:
        ddenom[IDX_R] += u

    # infection term beta*S*I/denom: product rule plus quotient rule
    dinf = np.zeros(5)
    dinf[IDX_I] = params.beta * S / denom
    dinf[IDX_S] = params.beta * I / denom
    dinf -= infection / denom * ddenom

    df_dx = np.zeros((5, 5))
    df_dx[IDX_I, IDX_I] = -(params.gamma + params.mu + params.alpha)
    df_dx[IDX_I, IDX_E] = params.epsilon
    df_dx[IDX_E] = dinf
    df_dx[IDX_E, IDX_E] -= params.mu + params.epsilon
    df_dx[IDX_S] = params.lam * dn - dinf
    df_dx[IDX_S, IDX_S] -= params.mu
    df_dx[IDX_R, IDX_I] = params.gamma
    df_dx[IDX_R, IDX_R] = -params.mu
    df_dx[IDX_D] = -(df_dx[IDX_I] + df_dx[IDX_E] + df_dx[IDX_S] + df_dx[IDX_R])

    df_du = np.zeros(5)
    if kind == VACCINATION:
        df_du[IDX_S] = -1.0
        df_du[IDX_R] = 1.0
    else:
        dq_du = -infection * R / denom
        df_du[IDX_E] = dq_du
        df_du[IDX_S] = -dq_du
    # dD row is the negated column sum by construction, so df_du[IDX_D] = 0
    return df_dx, df_du
