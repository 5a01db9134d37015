"""Scenario files: a flat INI document describing one synthesis problem.

Sections and keys (values in millions of persons unless noted):

    [model]          kind (vaccination|shield), ts (days), n0
    [params]         alpha, beta, epsilon, gamma, mu, lambda  (per day,
                     each either `center` or `center +- halfwidth`)
    [initial_state]  I, E, S, R, D  (each `center` or `center +- halfwidth`)
    [spec]           formula (specification text)
    [horizon]        days (integer)
    [control]        u_max, optional kind (must match [model] kind)
    [solver]         optional SolverConfig fields; schedules are
                     comma-separated numbers
    [seed]           optional value (integer, default 0)

Unknown sections or keys are rejected.
"""
from __future__ import annotations

import configparser
from importlib import resources

import numpy as np

from .dynamics import KINDS, ModelParams
from .errors import ScenarioError, SpecSyntaxError
from .mtl.parser import parse as parse_spec
from .reach import ParamBox, StateBox
from .synthesis import Scenario, SolverConfig

_STATE_KEYS = ("I", "E", "S", "R", "D")
_PARAM_KEYS = ("alpha", "beta", "epsilon", "gamma", "mu", "lambda")

_SOLVER_KEYS = {
    "beta_schedule": "schedule",
    "penalty_schedule": "schedule",
    "max_inner_iterations": "int",
    "feasibility_tol": "float",
    "iter_max": "int",
    "restarts": "int",
    "restart_scale": "float",
    "refine_steps": "int",
}

_SECTIONS = {
    "model": {"kind", "ts", "n0"},
    "params": set(_PARAM_KEYS),
    "initial_state": set(_STATE_KEYS),
    "spec": {"formula"},
    "horizon": {"days"},
    "control": {"u_max", "kind"},
    "solver": set(_SOLVER_KEYS),
    "seed": {"value"},
}


def _parse_uncertain(text: str, where: str) -> tuple[float, float]:
    """`center` or `center +- halfwidth` -> (center, halfwidth)."""
    parts = text.split("+-")
    try:
        if len(parts) == 1:
            return float(parts[0]), 0.0
        if len(parts) == 2:
            center, half = float(parts[0]), float(parts[1])
            if half < 0:
                raise ValueError
            return center, half
    except ValueError:
        pass
    raise ScenarioError(f"{where}: expected `center` or `center +- halfwidth`, got {text!r}")


def parse_scenario(text: str) -> Scenario:
    """Parse scenario file text into a Scenario."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (compartments are uppercase)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"malformed scenario file: {exc}") from exc

    for section in cp.sections():
        if section not in _SECTIONS:
            raise ScenarioError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in _SECTIONS[section]:
                raise ScenarioError(f"unknown key {key!r} in section [{section}]")
    for required in ("model", "params", "initial_state", "spec", "horizon", "control"):
        if required not in cp:
            raise ScenarioError(f"missing section [{required}]")

    def need(section: str, key: str) -> str:
        if key not in cp[section]:
            raise ScenarioError(f"missing key {key!r} in section [{section}]")
        return cp[section][key]

    kind = need("model", "kind").strip()
    if kind not in KINDS:
        raise ScenarioError(f"[model] kind must be one of {KINDS}, got {kind!r}")
    try:
        ts = float(need("model", "ts"))
        n0 = float(need("model", "n0"))
    except ValueError as exc:
        raise ScenarioError(f"[model]: {exc}") from exc

    centers, halves = [], []
    for key in _PARAM_KEYS:
        c, h = _parse_uncertain(need("params", key), f"[params] {key}")
        centers.append(c)
        halves.append(h)
    try:
        lower = ModelParams.from_rates(np.array(centers) - np.array(halves), n0, ts)
        upper = ModelParams.from_rates(np.array(centers) + np.array(halves), n0, ts)
        theta_box = ParamBox(lower, upper)
    except ValueError as exc:
        raise ScenarioError(f"[params]: {exc}") from exc

    x_centers, x_halves = [], []
    for key in _STATE_KEYS:
        c, h = _parse_uncertain(need("initial_state", key), f"[initial_state] {key}")
        x_centers.append(c)
        x_halves.append(h)
    x0_box = StateBox.from_center(np.array(x_centers), np.array(x_halves))

    spec_text = need("spec", "formula")
    try:
        formula = parse_spec(spec_text)
    except SpecSyntaxError as exc:
        raise ScenarioError(f"[spec] formula: {exc}") from exc

    try:
        horizon = int(need("horizon", "days"))
    except ValueError as exc:
        raise ScenarioError(f"[horizon] days: {exc}") from exc

    try:
        u_max = float(need("control", "u_max"))
    except ValueError as exc:
        raise ScenarioError(f"[control] u_max: {exc}") from exc
    if "kind" in cp["control"] and cp["control"]["kind"].strip() != kind:
        raise ScenarioError("[control] kind disagrees with [model] kind")

    solver_kwargs = {}
    if "solver" in cp:
        for key, value in cp["solver"].items():
            kind_of = _SOLVER_KEYS[key]
            try:
                if kind_of == "schedule":
                    solver_kwargs[key] = tuple(float(v) for v in value.split(","))
                elif kind_of == "int":
                    solver_kwargs[key] = int(value)
                else:
                    solver_kwargs[key] = float(value)
            except ValueError as exc:
                raise ScenarioError(f"[solver] {key}: {exc}") from exc
    try:
        solver = SolverConfig(**solver_kwargs)
    except ValueError as exc:
        raise ScenarioError(f"[solver]: {exc}") from exc

    seed = 0
    if "seed" in cp and "value" in cp["seed"]:
        try:
            seed = int(cp["seed"]["value"])
        except ValueError as exc:
            raise ScenarioError(f"[seed] value: {exc}") from exc

    try:
        return Scenario(kind=kind, x0_box=x0_box, theta_box=theta_box,
                        formula=formula, horizon=horizon, u_max=u_max,
                        solver=solver, seed=seed)
    except (ScenarioError, ValueError) as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_scenario(handle.read())


def bundled_scenario_names() -> list[str]:
    """Names of the scenario files shipped with the package."""
    root = resources.files("episynth") / "scenarios"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".ini"))


def bundled_scenario_text(name: str) -> str:
    path = resources.files("episynth") / "scenarios" / name
    if not path.is_file():
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return path.read_text(encoding="utf-8")
