"""Run artifacts: deterministic CSV and JSON renderings.

Numbers are serialized with 9 significant digits; day columns are
integers. JSON values are kept finite by clamping +/-inf to +/-1e300
(sign and ordering survive; magnitudes beyond that bound only arise from
diverged worst-case envelopes).
"""
from __future__ import annotations

import json
import math

import numpy as np

from .errors import ScenarioError
from .mtl.trajectory import IntervalTrajectory, Trajectory

CLAMP = 1e300

_STATE_COLS = ("I", "E", "S", "R", "D")


def _num(value: float) -> str:
    value = _finite(float(value))
    return f"{value:.9g}"


def _finite(value: float) -> float:
    if value == math.inf:
        return CLAMP
    if value == -math.inf:
        return -CLAMP
    return value


def json_safe(obj):
    """Recursively clamp non-finite floats for strict-JSON serialization."""
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return _finite(float(obj))
    if isinstance(obj, (int, np.integer, str, bool)) or obj is None:
        return obj
    if isinstance(obj, np.ndarray):
        return [json_safe(v) for v in obj.tolist()]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_report(report: dict) -> str:
    return json.dumps(json_safe(report), indent=2, sort_keys=True) + "\n"


def render_control_csv(values) -> str:
    lines = ["day,u"]
    for day, value in enumerate(np.asarray(values, dtype=float)):
        lines.append(f"{day},{_num(value)}")
    return "\n".join(lines) + "\n"


def render_point_trajectory_csv(trajectory: Trajectory) -> str:
    lines = ["day," + ",".join(_STATE_COLS)]
    for day, row in enumerate(trajectory.states):
        lines.append(f"{day}," + ",".join(_num(v) for v in row))
    return "\n".join(lines) + "\n"


def render_interval_trajectory_csv(interval: IntervalTrajectory) -> str:
    header = ["day"]
    for name in _STATE_COLS:
        header += [f"{name}_lower", f"{name}_nominal", f"{name}_upper"]
    lines = [",".join(header)]
    lower, upper = interval.lower.states, interval.upper.states
    for day in range(len(interval)):
        cells = [str(day)]
        for i in range(5):
            lo, hi = _finite(lower[day, i]), _finite(upper[day, i])
            cells += [_num(lo), _num(0.5 * (lo + hi)), _num(hi)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_control_csv(text: str) -> np.ndarray:
    lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
    if not lines or lines[0] != "day,u":
        raise ScenarioError("control CSV must start with header 'day,u'")
    values = []
    for lineno, line in enumerate(lines[1:]):
        cells = line.split(",")
        if len(cells) != 2:
            raise ScenarioError(f"control CSV row {lineno}: expected 2 columns")
        try:
            day, value = int(cells[0]), float(cells[1])
        except ValueError as exc:
            raise ScenarioError(f"control CSV row {lineno}: {exc}") from exc
        if day != lineno:
            raise ScenarioError(f"control CSV row {lineno}: day column out of order")
        values.append(value)
    return np.array(values)


def parse_point_trajectory_csv(text: str, step: float = 1.0) -> Trajectory:
    lines = [line.strip() for line in text.strip().splitlines() if line.strip()]
    expected_header = "day," + ",".join(_STATE_COLS)
    if not lines or lines[0] != expected_header:
        raise ScenarioError(f"trajectory CSV must start with header {expected_header!r}")
    rows = []
    for lineno, line in enumerate(lines[1:]):
        cells = line.split(",")
        if len(cells) != 6:
            raise ScenarioError(f"trajectory CSV row {lineno}: expected 6 columns")
        try:
            day = int(cells[0])
            rows.append([float(v) for v in cells[1:]])
        except ValueError as exc:
            raise ScenarioError(f"trajectory CSV row {lineno}: {exc}") from exc
        if day != lineno:
            raise ScenarioError(f"trajectory CSV row {lineno}: day column out of order")
    if not rows:
        raise ScenarioError("trajectory CSV has no data rows")
    return Trajectory(np.array(rows), step)
