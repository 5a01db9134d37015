"""Robust control synthesis for SEIR epidemic models under temporal logic
specifications: simulation, box reachability, robustness monitoring, and a
minimum-effort synthesis loop, exposed as a library, an HTTP service, and a
command-line client."""

__version__ = "0.1.0"

from .dynamics import (SHIELD, VACCINATION, ControlSignal, ModelParams,
                       derivative, jacobians, make_state, simulate, step,
                       validity_report)
from .mtl import (IntervalTrajectory, RobustnessInterval, Trajectory,
                  eval_boolean, interval_robustness, parse, robustness,
                  robustness_batch, smooth_robustness, smoothing_gap_bound)
from .reach import (CENTERED, NATURAL, DeltaProfile, ParamBox, StateBox,
                    delta_profile, interval_step, nominal_dynamic,
                    nominal_midpoint, propagate, sample_trajectories)
from .scenario_io import (bundled_scenario_names, bundled_scenario_text,
                          load_scenario, parse_scenario)
from .synthesis import (Scenario, SolverConfig, SynthesisResult,
                        VerificationReport, control_effort, solve_inner,
                        synthesize, verify)

__all__ = [
    "__version__",
    # specification language
    "parse", "eval_boolean", "robustness", "robustness_batch",
    "interval_robustness", "smooth_robustness", "smoothing_gap_bound",
    "Trajectory", "IntervalTrajectory", "RobustnessInterval",
    # dynamics
    "VACCINATION", "SHIELD", "ModelParams", "ControlSignal", "make_state",
    "derivative", "step", "simulate", "jacobians", "validity_report",
    # reachability
    "NATURAL", "CENTERED", "StateBox", "ParamBox", "DeltaProfile",
    "interval_step", "propagate", "delta_profile", "nominal_midpoint",
    "nominal_dynamic", "sample_trajectories",
    # synthesis
    "Scenario", "SolverConfig", "SynthesisResult", "VerificationReport",
    "control_effort", "solve_inner", "synthesize", "verify",
    # scenario files
    "parse_scenario", "load_scenario", "bundled_scenario_names",
    "bundled_scenario_text",
]
