"""HTTP service exposing synthesis, verification, simulation, and
robustness monitoring over scenario file text.

Requests carry scenario files verbatim so clients stay thin; responses
carry ready-to-write CSV blocks plus a report dictionary. Handlers are
pure computations, safe under concurrent requests.
"""
from __future__ import annotations

import time
from dataclasses import asdict, replace
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__
from .artifacts import (json_safe, parse_control_csv,
                        parse_point_trajectory_csv, render_control_csv,
                        render_interval_trajectory_csv,
                        render_point_trajectory_csv)
from .dynamics import simulate, validity_report
from .errors import EpisynthError
from .mtl.parser import parse as parse_spec
from .mtl.semantics import robustness
from .reach import CENTERED, NATURAL
from .scenario_io import parse_scenario
from .synthesis import Scenario, synthesize, verify

Mode = Literal[NATURAL, CENTERED]


class SynthesizeRequest(BaseModel):
    scenario: str  # scenario file text
    mode: Mode = CENTERED
    seed: Optional[int] = None  # overrides the scenario seed


class SynthesizeResponse(BaseModel):
    certified: bool
    success: bool
    control_effort: float
    control_csv: str
    trajectory_csv: str
    report: dict


class VerifyRequest(BaseModel):
    scenario: str
    control_csv: Optional[str] = None  # omitted -> all-zero control
    mode: Mode = CENTERED
    samples: int = 200
    seed: Optional[int] = None


class VerifyResponse(BaseModel):
    satisfied: bool
    report: dict


class SimulateRequest(BaseModel):
    scenario: str
    control_csv: Optional[str] = None  # omitted -> all-zero control
    seed: Optional[int] = None


class SimulateResponse(BaseModel):
    trajectory_csv: str
    report: dict


class RobustnessRequest(BaseModel):
    spec: str
    trajectory_csv: str
    at: int = 0


class RobustnessResponse(BaseModel):
    robustness: float
    satisfied: bool


def _scenario_from(text: str, seed: Optional[int]) -> Scenario:
    scenario = parse_scenario(text)
    if seed is not None:
        scenario = replace(scenario, seed=seed)
    return scenario


def _base_report(scenario: Scenario, mode: str | None = None) -> dict:
    report = {
        "kind": scenario.kind,
        "spec": str(scenario.formula),
        "horizon_days": scenario.horizon,
        "u_max": scenario.u_max,
        "seed": scenario.seed,
    }
    if mode is not None:
        report["mode"] = mode
    return report


def create_app() -> FastAPI:
    app = FastAPI(title="episynth", version=__version__)

    @app.exception_handler(EpisynthError)
    async def _domain_error(request, exc: EpisynthError):
        from fastapi.responses import JSONResponse
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/synthesize", response_model=SynthesizeResponse)
    def synthesize_endpoint(request: SynthesizeRequest) -> SynthesizeResponse:
        scenario = _scenario_from(request.scenario, request.seed)
        started = time.perf_counter()
        result = synthesize(scenario, request.mode)
        elapsed = time.perf_counter() - started
        report = _base_report(scenario, request.mode)
        report.update({
            "certified": result.certified,
            "success": result.success,
            "control_effort": result.control_effort,
            "robustness_interval": {"lo": result.interval.lo, "hi": result.interval.hi},
            "delta_max": result.delta_max,
            "iterations": [asdict(r) for r in result.iterations],
            "wall_clock_seconds": elapsed,
        })
        return SynthesizeResponse(
            certified=result.certified,
            success=result.success,
            control_effort=result.control_effort,
            control_csv=render_control_csv(result.control.values),
            trajectory_csv=render_interval_trajectory_csv(result.interval_trajectory),
            report=json_safe(report),
        )

    @app.post("/verify", response_model=VerifyResponse)
    def verify_endpoint(request: VerifyRequest) -> VerifyResponse:
        scenario = _scenario_from(request.scenario, request.seed)
        if request.control_csv is None:
            values = [0.0] * scenario.horizon
        else:
            values = parse_control_csv(request.control_csv)
        if len(values) != scenario.horizon:
            raise HTTPException(
                status_code=400,
                detail=f"control has {len(values)} rows but the horizon is "
                       f"{scenario.horizon} days")
        started = time.perf_counter()
        outcome = verify(values, scenario, request.mode, request.samples)
        elapsed = time.perf_counter() - started
        report = _base_report(scenario, request.mode)
        report.update({
            "satisfied": outcome.satisfied,
            "robustness_interval": {"lo": outcome.interval.lo, "hi": outcome.interval.hi},
            "delta_max": outcome.delta_max,
            "nominal_robustness": outcome.nominal_robustness,
            "sampled_min_robustness": outcome.sampled_min_robustness,
            "deviation_residual_max": outcome.deviation_residual_max,
            "samples": outcome.samples,
            "wall_clock_seconds": elapsed,
        })
        return VerifyResponse(satisfied=outcome.satisfied, report=json_safe(report))

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate_endpoint(request: SimulateRequest) -> SimulateResponse:
        scenario = _scenario_from(request.scenario, request.seed)
        if request.control_csv is None:
            values = [0.0] * scenario.horizon
        else:
            values = parse_control_csv(request.control_csv)
        if len(values) < scenario.horizon:
            raise HTTPException(
                status_code=400,
                detail=f"control has {len(values)} rows but the horizon is "
                       f"{scenario.horizon} days")
        started = time.perf_counter()
        trajectory = simulate(scenario.x0_box.midpoint, values,
                              scenario.theta_box.midpoint, scenario.horizon,
                              scenario.kind)
        elapsed = time.perf_counter() - started
        totals = trajectory.states.sum(axis=1)
        report = _base_report(scenario)
        report.update({
            "negative_entries": [[k, name] for k, name in validity_report(trajectory)],
            "conservation_drift": float(abs(totals - totals[0]).max()),
            "final_state": {name: float(v) for name, v in
                            zip("IESRD", trajectory.states[-1])},
            "wall_clock_seconds": elapsed,
        })
        return SimulateResponse(
            trajectory_csv=render_point_trajectory_csv(trajectory),
            report=json_safe(report),
        )

    @app.post("/robustness", response_model=RobustnessResponse)
    def robustness_endpoint(request: RobustnessRequest) -> RobustnessResponse:
        formula = parse_spec(request.spec)
        trajectory = parse_point_trajectory_csv(request.trajectory_csv)
        value = robustness(trajectory, formula, request.at)
        return RobustnessResponse(robustness=json_safe(value), satisfied=value >= 0)

    return app


app = create_app()
