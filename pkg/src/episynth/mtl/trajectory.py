"""Discrete-time state trajectories and per-step state boxes."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STATE_DIM = 5


@dataclass(frozen=True)
class Trajectory:
    """A sequence of state vectors sampled every `step` days.

    `states` has shape (T+1, 5) with columns ordered I, E, S, R, D, in
    millions of persons. Simulated trajectories are always finite; the
    envelopes of an IntervalTrajectory may carry +/-inf when a diverging
    box propagation is recorded. NaN is never allowed.
    """

    states: np.ndarray
    step: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.states, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != STATE_DIM:
            raise ValueError(f"states must have shape (T+1, {STATE_DIM})")
        if np.isnan(arr).any():
            raise ValueError("trajectory contains NaN entries")
        if self.step < 0:
            raise ValueError("step must be nonnegative")
        object.__setattr__(self, "states", arr)

    def __len__(self) -> int:
        return self.states.shape[0]

    def suffix(self, k: int) -> "Trajectory":
        """The trajectory starting at index k."""
        return Trajectory(self.states[k:], self.step)


@dataclass(frozen=True)
class IntervalTrajectory:
    """Componentwise lower/upper envelope of a set of trajectories."""

    lower: Trajectory
    upper: Trajectory

    def __post_init__(self):
        if len(self.lower) != len(self.upper) or self.lower.step != self.upper.step:
            raise ValueError("lower and upper must share length and step")
        if np.any(self.lower.states > self.upper.states):
            raise ValueError("malformed interval: lower exceeds upper")

    def __len__(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> np.ndarray:
        return self.upper.states - self.lower.states


@dataclass(frozen=True)
class RobustnessInterval:
    """Bracket [lo, hi] on the robustness of every trajectory in a box."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("robustness interval must satisfy lo <= hi")
