"""Temporal specification language: syntax, parsing, and semantics."""

from .formula import (GE, LE, STATE_VARS, VAR_INDEX, Always, And, Atom,
                      Eventually, Formula, Not, Or, TrueFormula, Until,
                      max_aggregation_arity)
from .parser import parse
from .semantics import (eval_boolean, interval_robustness, robustness,
                        robustness_batch, smooth_robustness,
                        smoothing_gap_bound)
from .trajectory import IntervalTrajectory, RobustnessInterval, Trajectory

__all__ = [
    "GE", "LE", "STATE_VARS", "VAR_INDEX",
    "Always", "And", "Atom", "Eventually", "Formula", "Not", "Or",
    "TrueFormula", "Until",
    "Trajectory", "IntervalTrajectory", "RobustnessInterval",
    "parse", "max_aggregation_arity",
    "eval_boolean", "robustness", "robustness_batch", "interval_robustness",
    "smooth_robustness", "smoothing_gap_bound",
]
