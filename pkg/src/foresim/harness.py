"""Headless scenario runner: deterministic runs, traces, and paired comparison.

``run`` executes one scenario with an optional intervention script and
returns :class:`RunMetrics`; ``compare`` executes the same scenario with and
without the script and reports both plus deltas. Traces are wide CSV, one
row per tick, with per-vehicle columns prefixed by the vehicle id. Identical
inputs produce byte-identical traces and reports.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

from .prediction import BehaviorLabel
from .scenario import ScenarioConfig, load_scenario
from .simloop import SimulationLoop, TickRecord


class ScriptVehicleUnknown(Exception):
    """Intervention script names a vehicle the scenario does not define."""


@dataclass(frozen=True)
class ScriptEntry:
    time: float
    vehicle_id: str
    direction: BehaviorLabel


_DIRECTIONS = {"left": BehaviorLabel.CHANGE_LEFT,
               "right": BehaviorLabel.CHANGE_RIGHT}


def load_script(text: str, config: ScenarioConfig) -> tuple[ScriptEntry, ...]:
    """Parse an intervention script: one ``time vehicle_id direction`` per line.

    Times must be non-decreasing and inside the scenario duration; vehicle
    ids must exist (else :class:`ScriptVehicleUnknown`).
    """
    known = {v.id for v in config.traffic}
    entries = []
    last_time = -math.inf
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[2].lower() not in _DIRECTIONS:
            raise ValueError(f"script line {line_no}: expected 'time vehicle_id left|right'")
        t = float(parts[0])
        if t < last_time:
            raise ValueError(f"script line {line_no}: times must be non-decreasing")
        if not 0.0 <= t <= config.duration:
            raise ValueError(f"script line {line_no}: time outside scenario duration")
        if parts[1] not in known:
            raise ScriptVehicleUnknown(parts[1])
        last_time = t
        entries.append(ScriptEntry(t, parts[1], _DIRECTIONS[parts[2].lower()]))
    return tuple(entries)


@dataclass(frozen=True)
class RunMetrics:
    """Per-run summary statistics.

    ``max_decel`` and ``jerk_integral`` come from the effective per-tick ego
    acceleration (dv/dt); the jerk integral is sum((da/dt)^2 * dt) over
    consecutive ticks. ``min_front_gap``/``min_ttc`` are inf when the ego
    never had a leader / was never closing on one.
    """

    max_decel: float
    min_front_gap: float
    min_ttc: float
    ego_lane_change_times: tuple[float, ...]
    jerk_integral: float
    collisions: int
    trace_path: Optional[str] = None


def metrics_from_loop(loop: SimulationLoop,
                      trace_path: Optional[str] = None) -> RunMetrics:
    rows = loop.rows
    dt = loop.config.dt
    max_decel = 0.0
    min_gap = math.inf
    min_ttc = math.inf
    jerk = 0.0
    pairs = set()
    prev_a = None
    for row in rows:
        if -row.a_eff > max_decel:
            max_decel = -row.a_eff
        if row.front_gap < min_gap:
            min_gap = row.front_gap
        closing = row.scene.ego.v - row.leader_speed
        if math.isfinite(row.front_gap) and closing > 0.0:
            ttc = row.front_gap / closing
            if ttc < min_ttc:
                min_ttc = ttc
        if prev_a is not None:
            d = (row.a_eff - prev_a) / dt
            jerk += d * d * dt
        prev_a = row.a_eff
        for pair in row.collisions:
            pairs.add(pair)
    return RunMetrics(max_decel=max_decel, min_front_gap=min_gap,
                      min_ttc=min_ttc,
                      ego_lane_change_times=tuple(loop.lane_change_times),
                      jerk_integral=jerk, collisions=len(pairs),
                      trace_path=trace_path)


# ---------- trace ----------

def _fmt(value) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return repr(value)
    return str(value)


def write_trace(rows: Sequence[TickRecord], config: ScenarioConfig,
                path: Path) -> None:
    """Wide CSV trace: one row per tick, vehicle columns ordered by id."""
    vehicle_ids = sorted(v.id for v in config.traffic)
    header = ["tick", "time", "ego_s", "ego_lane", "ego_lat", "ego_v",
              "ego_a_cmd", "ego_a", "front_gap", "plan_behavior",
              "plan_cost", "indicator"]
    for vid in vehicle_ids:
        header += [f"{vid}_s", f"{vid}_lane", f"{vid}_lat", f"{vid}_v",
                   f"{vid}_a", f"{vid}_pred", f"{vid}_p", f"{vid}_flag",
                   f"{vid}_injected"]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            ego = row.scene.ego
            flagged = {vid for vid, _ in row.flags}
            out = [row.tick, _fmt(row.time), _fmt(ego.s), ego.lane_index,
                   _fmt(ego.lateral_offset), _fmt(ego.v), _fmt(row.a_cmd),
                   _fmt(row.a_eff), _fmt(row.front_gap),
                   row.plan.behavior.value, _fmt(row.plan.expected_cost),
                   row.plan.indicator]
            by_id = {v.id: v for v in row.scene.traffic}
            for vid in vehicle_ids:
                veh = by_id[vid]
                direction, p = row.pred_display.get(vid, ("", 0.0))
                out += [_fmt(veh.s), veh.lane_index, _fmt(veh.lateral_offset),
                        _fmt(veh.v), _fmt(veh.a), direction, _fmt(p),
                        int(vid in flagged), int(vid in row.injected_ids)]
            writer.writerow(out)


# ---------- run / compare ----------

def run(config: ScenarioConfig, script: Sequence[ScriptEntry] = (),
        trace_path: Optional[Path] = None,
        on_replan=None) -> tuple[RunMetrics, SimulationLoop]:
    """Execute one scenario to its configured duration.

    Returns the metrics and the finished loop (rows included) so callers can
    report or plot without re-running.
    """
    loop = SimulationLoop(config, on_replan=on_replan)
    loop.run([(e.time, e.vehicle_id, e.direction) for e in script])
    if trace_path is not None:
        write_trace(loop.rows, config, Path(trace_path))
    metrics = metrics_from_loop(loop, str(trace_path) if trace_path else None)
    return metrics, loop


def _metrics_json(metrics: RunMetrics) -> dict:
    out = asdict(metrics)
    for key in ("min_front_gap", "min_ttc"):
        if math.isinf(out[key]):
            out[key] = None
    out["ego_lane_change_times"] = list(out["ego_lane_change_times"])
    return out


_DELTA_FIELDS = ("max_decel", "min_front_gap", "min_ttc", "jerk_integral",
                 "collisions")


def compare(config: ScenarioConfig, script: Sequence[ScriptEntry],
            name: str = "scenario") -> dict:
    """Run baseline (empty script) and intervened; return the paired report.

    The report dict is JSON-ready: per-run metrics plus intervened-minus-
    baseline deltas for the scalar fields (None where either side is
    undefined). Loops are attached under a private key for rendering.
    """
    base_metrics, base_loop = run(config, ())
    int_metrics, int_loop = run(config, script)
    deltas = {}
    bj, ij = _metrics_json(base_metrics), _metrics_json(int_metrics)
    for field_name in _DELTA_FIELDS:
        b, i = bj[field_name], ij[field_name]
        deltas[field_name] = None if b is None or i is None else i - b
    report = {
        "scenario": name,
        "baseline": bj,
        "intervened": ij,
        "delta": deltas,
    }
    report["_loops"] = (base_loop, int_loop)
    return report


def render_report_text(report: dict) -> str:
    """Two-column human-readable table of the paired metrics."""
    keys = ["max_decel", "min_front_gap", "min_ttc", "jerk_integral",
            "collisions", "ego_lane_change_times"]
    lines = [f"scenario: {report['scenario']}",
             f"{'metric':<22}{'baseline':>16}{'intervened':>16}{'delta':>12}"]

    def cell(value):
        if value is None:
            return "-"
        if isinstance(value, list):
            return "[" + ", ".join(f"{t:.2f}" for t in value) + "]"
        if isinstance(value, float):
            return f"{value:.4f}"
        return str(value)

    for key in keys:
        delta = report["delta"].get(key)
        lines.append(f"{key:<22}{cell(report['baseline'][key]):>16}"
                     f"{cell(report['intervened'][key]):>16}"
                     f"{cell(delta):>12}")
    return "\n".join(lines) + "\n"


def report_to_json(report: dict) -> str:
    public = {k: v for k, v in report.items() if not k.startswith("_")}
    return json.dumps(public, sort_keys=True, indent=2) + "\n"


def load_scenario_file(path: Path) -> ScenarioConfig:
    return load_scenario(Path(path).read_text())
