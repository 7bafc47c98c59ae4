"""Scenario file parsing and validation.

The format is line oriented: every non-blank, non-comment line starts with a
section tag followed by space-separated ``key=value`` pairs, e.g.::

    [road] lanes=3 lane_width=3.5 merge=0:300:500
    [ego] lane=1 s=0 v=30 v_des=30
    [vehicle] id=truck1 kind=truck lane=0 s=120 v=17
    [vehicle] id=car1 kind=car lane=0 s=60 v=26 change=left@4.5
    [sim] dt=0.05 duration=40 seed=1

``[vehicle]`` lines repeat, one per vehicle; ``[road]``, ``[ego]`` and
``[sim]`` appear exactly once.  Optional ``[prediction]`` and ``[planner]``
lines override module defaults.  Unknown sections or keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .world import (DEFAULT_IDM, IDMParams, RoadModel, ScriptedChange,
                    VehicleState, VEHICLE_DIMENSIONS)


class ParseError(Exception):
    """Malformed scenario text (bad syntax, unknown key, wrong type)."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ValidationError(Exception):
    """Well-formed but physically inconsistent scenario."""


@dataclass(frozen=True)
class PredictionParams:
    """Tunables of the cut-in predictor."""

    t0: float = 6.0  # s, motif trigger horizon
    tau: float = 1.5  # s, logistic temperature
    threshold: float = 0.5  # display / flag threshold
    k: int = 8  # compositions kept after pruning
    lookahead: float = 3.0  # s, projection used by the gap factor


@dataclass(frozen=True)
class PlannerParams:
    """Tunables of the trajectory optimizer and behavior selection."""

    w_safety: float = 10.0
    w_utility: float = 0.1
    w_comfort: float = 1.0
    penalty: float = 5.0  # lane-change maneuver penalty
    horizon: float = 8.0
    seg_duration: float = 2.0
    rollout_dt: float = 0.25
    grid: tuple[float, ...] = (0.0, -1.0, 1.0, -2.0, 2.0, -3.0)
    replan_period: int = 10  # world ticks between replans
    collision_penalty: float = 1e6
    headway: float = 1.5  # s, d_safe = standstill + headway * v
    standstill: float = 2.0  # m
    indicator_lead: float = 3.0  # s between indicator and lateral motion


@dataclass(frozen=True)
class ScenarioConfig:
    road: RoadModel
    ego: VehicleState
    traffic: tuple[VehicleState, ...]
    duration: float
    dt: float = 0.05
    seed: int = 0
    prediction: PredictionParams = field(default_factory=PredictionParams)
    planner: PlannerParams = field(default_factory=PlannerParams)


# section -> allowed keys
_SECTION_KEYS = {
    "road": {"lanes", "lane_width", "merge"},
    "ego": {"lane", "s", "v", "v_des"},
    "vehicle": {"id", "kind", "lane", "s", "v", "v_des", "length", "width",
                "change", "a_max", "b", "T", "s0", "delta"},
    "sim": {"dt", "duration", "seed"},
    "prediction": {"t0", "tau", "threshold", "k", "lookahead"},
    "planner": {"w_safety", "w_utility", "w_comfort", "penalty", "horizon",
                "seg_duration", "rollout_dt", "grid", "replan_period",
                "collision_penalty", "headway", "standstill",
                "indicator_lead"},
}

_SINGLETON_SECTIONS = ("road", "ego", "sim")


def _parse_line(line_no: int, line: str) -> tuple[str, dict[str, str]]:
    parts = line.split()
    tag = parts[0]
    if not (tag.startswith("[") and tag.endswith("]")):
        raise ParseError(line_no, f"expected a [section] tag, got {tag!r}")
    section = tag[1:-1]
    if section not in _SECTION_KEYS:
        raise ParseError(line_no, f"unknown section [{section}]")
    pairs: dict[str, str] = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise ParseError(line_no, f"expected key=value, got {tok!r}")
        key, _, value = tok.partition("=")
        if key not in _SECTION_KEYS[section]:
            raise ParseError(line_no, f"unknown key {key!r} in [{section}]")
        if key in pairs:
            raise ParseError(line_no, f"duplicate key {key!r}")
        pairs[key] = value
    return section, pairs


def _to_float(line_no: int, key: str, value: str) -> float:
    try:
        out = float(value)
    except ValueError:
        raise ParseError(line_no, f"{key}: expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ParseError(line_no, f"{key}: must be finite")
    return out


def _to_int(line_no: int, key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(line_no, f"{key}: expected an integer, got {value!r}") from None


def _require(line_no: int, pairs: dict[str, str], keys: tuple[str, ...],
             section: str) -> None:
    for key in keys:
        if key not in pairs:
            raise ParseError(line_no, f"[{section}] is missing {key!r}")


def _parse_merge(line_no: int, value: str) -> tuple[tuple[int, float, float], ...]:
    sections = []
    for chunk in value.split(","):
        bits = chunk.split(":")
        if len(bits) != 3:
            raise ParseError(line_no, f"merge: expected lane:start:end, got {chunk!r}")
        lane = _to_int(line_no, "merge", bits[0])
        s0 = _to_float(line_no, "merge", bits[1])
        s1 = _to_float(line_no, "merge", bits[2])
        sections.append((lane, s0, s1))
    return tuple(sections)


def _parse_changes(line_no: int, value: str) -> tuple[ScriptedChange, ...]:
    out = []
    for chunk in value.split(","):
        direction, _, at = chunk.partition("@")
        if direction not in ("left", "right") or not at:
            raise ParseError(line_no, f"change: expected left@T or right@T, got {chunk!r}")
        out.append(ScriptedChange(time=_to_float(line_no, "change", at),
                                  direction=1 if direction == "left" else -1))
    return tuple(out)


def load_scenario(text: str) -> ScenarioConfig:
    """Parse scenario text into a validated :class:`ScenarioConfig`.

    Raises :class:`ParseError` for syntax/unknown-key problems (with the line
    number) and :class:`ValidationError` for inconsistent physics (overlapping
    spawns, bad lane indices, non-positive dt, ...).
    """
    seen: dict[str, tuple[int, dict[str, str]]] = {}
    vehicles: list[tuple[int, dict[str, str]]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        section, pairs = _parse_line(line_no, line)
        if section == "vehicle":
            vehicles.append((line_no, pairs))
        elif section in seen:
            raise ParseError(line_no, f"duplicate section [{section}]")
        else:
            seen[section] = (line_no, pairs)

    for section in _SINGLETON_SECTIONS:
        if section not in seen:
            raise ParseError(0, f"missing required section [{section}]")

    line_no, pairs = seen["road"]
    _require(line_no, pairs, ("lanes",), "road")
    road = RoadModel(
        lane_count=_to_int(line_no, "lanes", pairs["lanes"]),
        lane_width=_to_float(line_no, "lane_width", pairs.get("lane_width", "3.5")),
        merge_sections=_parse_merge(line_no, pairs["merge"]) if "merge" in pairs else (),
    )

    line_no, pairs = seen["ego"]
    _require(line_no, pairs, ("lane", "s", "v"), "ego")
    ego_v = _to_float(line_no, "v", pairs["v"])
    ego = VehicleState(
        id="ego", kind="car",
        lane_index=_to_int(line_no, "lane", pairs["lane"]),
        s=_to_float(line_no, "s", pairs["s"]),
        v=ego_v,
        v_des=_to_float(line_no, "v_des", pairs.get("v_des", pairs["v"])),
        length=VEHICLE_DIMENSIONS["car"][0], width=VEHICLE_DIMENSIONS["car"][1],
    )

    traffic = []
    for line_no, pairs in vehicles:
        _require(line_no, pairs, ("id", "kind", "lane", "s", "v"), "vehicle")
        kind = pairs["kind"]
        if kind not in VEHICLE_DIMENSIONS:
            raise ParseError(line_no, f"unknown vehicle kind {kind!r}")
        length, width = VEHICLE_DIMENSIONS[kind]
        v = _to_float(line_no, "v", pairs["v"])
        idm = DEFAULT_IDM
        overrides = {k: _to_float(line_no, k, pairs[k])
                     for k in ("a_max", "b", "T", "s0", "delta") if k in pairs}
        if overrides:
            idm = IDMParams(**{**DEFAULT_IDM.__dict__, **overrides})
        traffic.append(VehicleState(
            id=pairs["id"], kind=kind,
            lane_index=_to_int(line_no, "lane", pairs["lane"]),
            s=_to_float(line_no, "s", pairs["s"]),
            v=v,
            v_des=_to_float(line_no, "v_des", pairs.get("v_des", pairs["v"])),
            length=_to_float(line_no, "length", pairs.get("length", repr(length))),
            width=_to_float(line_no, "width", pairs.get("width", repr(width))),
            idm=idm,
            scripted=_parse_changes(line_no, pairs["change"]) if "change" in pairs else (),
        ))

    line_no, pairs = seen["sim"]
    _require(line_no, pairs, ("duration",), "sim")
    dt = _to_float(line_no, "dt", pairs.get("dt", "0.05"))
    duration = _to_float(line_no, "duration", pairs["duration"])
    seed = _to_int(line_no, "seed", pairs.get("seed", "0"))

    prediction = PredictionParams()
    if "prediction" in seen:
        line_no, pairs = seen["prediction"]
        prediction = PredictionParams(
            t0=_to_float(line_no, "t0", pairs.get("t0", "6.0")),
            tau=_to_float(line_no, "tau", pairs.get("tau", "1.5")),
            threshold=_to_float(line_no, "threshold", pairs.get("threshold", "0.5")),
            k=_to_int(line_no, "k", pairs.get("k", "8")),
            lookahead=_to_float(line_no, "lookahead", pairs.get("lookahead", "3.0")),
        )

    planner = PlannerParams()
    if "planner" in seen:
        line_no, pairs = seen["planner"]
        defaults = PlannerParams()
        grid = defaults.grid
        if "grid" in pairs:
            grid = tuple(_to_float(line_no, "grid", g) for g in pairs["grid"].split(","))
        planner = PlannerParams(
            w_safety=_to_float(line_no, "w_safety", pairs.get("w_safety", repr(defaults.w_safety))),
            w_utility=_to_float(line_no, "w_utility", pairs.get("w_utility", repr(defaults.w_utility))),
            w_comfort=_to_float(line_no, "w_comfort", pairs.get("w_comfort", repr(defaults.w_comfort))),
            penalty=_to_float(line_no, "penalty", pairs.get("penalty", repr(defaults.penalty))),
            horizon=_to_float(line_no, "horizon", pairs.get("horizon", repr(defaults.horizon))),
            seg_duration=_to_float(line_no, "seg_duration", pairs.get("seg_duration", repr(defaults.seg_duration))),
            rollout_dt=_to_float(line_no, "rollout_dt", pairs.get("rollout_dt", repr(defaults.rollout_dt))),
            grid=grid,
            replan_period=_to_int(line_no, "replan_period", pairs.get("replan_period", repr(defaults.replan_period))),
            collision_penalty=_to_float(line_no, "collision_penalty", pairs.get("collision_penalty", repr(defaults.collision_penalty))),
            headway=_to_float(line_no, "headway", pairs.get("headway", repr(defaults.headway))),
            standstill=_to_float(line_no, "standstill", pairs.get("standstill", repr(defaults.standstill))),
            indicator_lead=_to_float(line_no, "indicator_lead", pairs.get("indicator_lead", repr(defaults.indicator_lead))),
        )

    config = ScenarioConfig(road=road, ego=ego, traffic=tuple(traffic),
                            duration=duration, dt=dt, seed=seed,
                            prediction=prediction, planner=planner)
    _validate(config)
    return config


def _validate(config: ScenarioConfig) -> None:
    road = config.road
    if road.lane_count < 2:
        raise ValidationError("need at least two lanes")
    if road.lane_width <= 0:
        raise ValidationError("lane_width must be positive")
    for lane, s0, s1 in road.merge_sections:
        if not 0 <= lane < road.lane_count:
            raise ValidationError(f"merge section on invalid lane {lane}")
        if s1 <= s0:
            raise ValidationError("merge section must have s_end > s_start")
    if config.dt <= 0:
        raise ValidationError("dt must be positive")
    if config.duration <= 0:
        raise ValidationError("duration must be positive")
    if config.planner.replan_period < 1:
        raise ValidationError("replan_period must be at least 1 tick")
    if config.prediction.k < 1:
        raise ValidationError("prediction k must be at least 1")

    everyone = (config.ego,) + config.traffic
    ids = [v.id for v in everyone]
    if len(set(ids)) != len(ids):
        raise ValidationError("vehicle ids must be unique")
    for veh in everyone:
        if not 0 <= veh.lane_index < road.lane_count:
            raise ValidationError(f"{veh.id}: lane {veh.lane_index} out of range")
        if veh.v < 0:
            raise ValidationError(f"{veh.id}: negative speed")
        lane = veh.lane_index
        for trig in sorted(veh.scripted, key=lambda c: c.time):
            lane += trig.direction
            if not 0 <= lane < road.lane_count:
                raise ValidationError(f"{veh.id}: scripted change leaves the road")
    for i, a in enumerate(everyone):
        for b in everyone[i + 1:]:
            if a.lane_index == b.lane_index and abs(a.s - b.s) < a.length + b.length:
                raise ValidationError(
                    f"{a.id} and {b.id} spawn overlapping on lane {a.lane_index}")
