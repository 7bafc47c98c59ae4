"""The per-tick control cycle shared by the headless harness and the bridge.

Tick order (everything reads the snapshot at the tick boundary):

1. expire stale intervention records,
2. apply injections queued for this boundary (scripted or live),
3. replan when due: every ``replan_period`` ticks, or immediately when an
   injection was applied, never during a committed lateral blend,
4. derive controls from the active plan (profile accel + blend lateral rate),
5. record the tick, then step the world.

Lane changes commit in two phases: while signaling (3 s) replans may update
the acceleration profile or cancel back to Straight, but keep the original
activation instant; once lateral motion starts the plan freezes until the
blend completes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

from .intervention import InterventionRecord, apply_overrides, expire, inject
from .planner import ManeuverPlan, select_behavior
from .prediction import (BehaviorLabel, ConditionalPrediction, EgoBehavior,
                         high_probability_flags, predict_scene)
from .scenario import ScenarioConfig
from .world import (LANE_CHANGE_DURATION, SceneState, blend_fraction,
                    net_gap, step_world)

EPS = 1e-9  # slack for time comparisons on tick-quantized floats


@dataclass
class _Signal:
    """A committed lane-change announcement."""

    direction: int
    activation: float
    lateral_start: float
    from_lane: int
    blend_begun: bool = False


@dataclass
class TickRecord:
    """Everything observable at one tick, for traces, metrics and the wire."""

    tick: int
    time: float
    scene: SceneState
    plan: ManeuverPlan
    a_cmd: float
    lat_rate: float
    front_gap: float  # net gap to the same-lane leader, inf without one
    leader_speed: float
    flags: tuple[tuple[str, BehaviorLabel], ...]
    pred_display: dict[str, tuple[str, float]]  # id -> (direction, p_change)
    injected_ids: frozenset[str]
    collisions: tuple[tuple[str, str], ...]
    a_eff: float = 0.0  # (v' - v)/dt, filled after stepping


class SimulationLoop:
    """Deterministic fixed-step co-driving session."""

    def __init__(self, config: ScenarioConfig,
                 on_replan: Optional[Callable] = None):
        self.config = config
        self.params = config.planner
        self.pred_params = config.prediction
        self.scene = SceneState(time=0.0, tick=0, road=config.road,
                                ego=config.ego, traffic=config.traffic)
        self.records: list[InterventionRecord] = []
        self.plan: Optional[ManeuverPlan] = None
        self.predictions: list[ConditionalPrediction] = []
        self.signal: Optional[_Signal] = None
        self.rows: list[TickRecord] = []
        self.lane_change_times: list[float] = []
        self.on_replan = on_replan  # hook(tick, predictions, plan), for inspection

    # ---------- queries ----------

    @property
    def finished(self) -> bool:
        return self.scene.time >= self.config.duration - EPS

    def in_blend(self) -> bool:
        sig = self.signal
        return (sig is not None
                and self.scene.time >= sig.lateral_start - EPS)

    # ---------- one tick ----------

    def step_tick(self, interventions: Sequence[tuple[str, BehaviorLabel]] = ()):
        scene = self.scene
        t = scene.time

        self.records = expire(scene, self.records)
        injected = False
        for vehicle_id, direction in interventions:
            self.records = inject(scene, vehicle_id, direction, self.records)
            injected = True

        sig = self.signal
        if sig is not None and t >= sig.lateral_start + LANE_CHANGE_DURATION - EPS:
            sig = self.signal = None  # blend complete, unfreeze

        due = (scene.tick % self.params.replan_period == 0 or injected
               or self.plan is None)
        if due and not self.in_blend():
            self._replan(scene)
            sig = self.signal

        a_cmd = self.plan.profile.value_at(t - self.plan.created_time,
                                           self.params.seg_duration)
        lat_rate = 0.0
        if sig is not None and t >= sig.lateral_start - EPS:
            if not sig.blend_begun:
                sig.blend_begun = True
                self.lane_change_times.append(sig.lateral_start)
            lat_rate = self._blend_rate(sig, t)

        scene = replace(scene, active_plan=self.plan,
                        interventions=tuple(self.records))
        row = self._capture(scene, a_cmd, lat_rate)
        new_scene = step_world(scene, (a_cmd, lat_rate), self.config.dt)
        row.a_eff = (new_scene.ego.v - scene.ego.v) / self.config.dt
        self.rows.append(row)
        self.scene = new_scene

    def run(self, script: Sequence[tuple[float, str, BehaviorLabel]] = ()):
        """Step until the configured duration, applying timed injections."""
        pending = sorted(script, key=lambda e: e[0])
        i = 0
        ticks = int(round(self.config.duration / self.config.dt))
        for _ in range(ticks):
            due = []
            while i < len(pending) and pending[i][0] <= self.scene.time + EPS:
                due.append((pending[i][1], pending[i][2]))
                i += 1
            self.step_tick(due)

    # ---------- internals ----------

    def _replan(self, scene: SceneState):
        preds = apply_overrides(predict_scene(scene, self.pred_params),
                                self.records)
        plan = select_behavior(scene, preds, self.params,
                               self.pred_params.k)
        sig = self.signal
        if plan.behavior is EgoBehavior.STRAIGHT:
            self.signal = None
        elif sig is not None and sig.direction == plan.indicator:
            # keep the original announcement; only the profile refreshes
            plan = replace(plan, activation_time=sig.activation,
                           lateral_start_time=sig.lateral_start)
        else:
            self.signal = _Signal(direction=plan.indicator,
                                  activation=plan.activation_time,
                                  lateral_start=plan.lateral_start_time,
                                  from_lane=scene.ego.lane_index)
        self.plan = plan
        self.predictions = preds
        if self.on_replan is not None:
            self.on_replan(scene.tick, preds, plan)

    def _blend_rate(self, sig: _Signal, t: float) -> float:
        road = self.scene.road
        y0 = road.lane_center(sig.from_lane)
        y1 = road.lane_center(sig.from_lane + sig.direction)
        tau = t - sig.lateral_start
        tau_next = min(tau + self.config.dt, LANE_CHANGE_DURATION)
        y_now = y0 + (y1 - y0) * blend_fraction(tau)
        y_next = y0 + (y1 - y0) * blend_fraction(tau_next)
        return (y_next - y_now) / self.config.dt

    def _capture(self, scene: SceneState, a_cmd: float,
                 lat_rate: float) -> TickRecord:
        ego = scene.ego
        leader = None
        for veh in scene.traffic:
            if veh.lane_index == ego.lane_index and veh.s >= ego.s:
                if leader is None or veh.s < leader.s:
                    leader = veh
        front_gap = net_gap(ego, leader) if leader is not None else math.inf
        leader_speed = leader.v if leader is not None else 0.0

        behavior = self.plan.behavior
        threshold = self.pred_params.threshold
        flags = tuple(high_probability_flags(self.predictions, behavior,
                                             threshold))
        display: dict[str, tuple[str, float]] = {}
        for pred in self.predictions:
            dist = pred.dist(behavior)
            p_left = dist.get(BehaviorLabel.CHANGE_LEFT, 0.0)
            p_right = dist.get(BehaviorLabel.CHANGE_RIGHT, 0.0)
            if p_left + p_right > 0.0:
                direction = "left" if p_left >= p_right else "right"
            else:
                direction = ""
            display[pred.vehicle_id] = (direction, p_left + p_right)

        collisions = []
        everyone = (ego,) + scene.traffic
        for i, a in enumerate(everyone):
            for b in everyone[i + 1:]:
                if (a.lane_index == b.lane_index
                        and abs(a.s - b.s) < 0.5 * (a.length + b.length)):
                    collisions.append((a.id, b.id))

        return TickRecord(
            tick=scene.tick, time=scene.time, scene=scene, plan=self.plan,
            a_cmd=a_cmd, lat_rate=lat_rate, front_gap=front_gap,
            leader_speed=leader_speed, flags=flags, pred_display=display,
            injected_ids=frozenset(r.vehicle_id for r in self.records),
            collisions=tuple(collisions))
