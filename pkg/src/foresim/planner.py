"""Probabilistic maneuver planning by exhaustive profile search.

For each feasible ego behavior (Straight, LaneChangeLeft, LaneChangeRight)
the planner rolls out every acceleration profile on a fixed grid (4 segments
of 2 s, 6 values each: 1296 candidates) against every scene composition,
scores safety / utility / comfort, and picks the behavior minimizing the
probability-weighted expected cost plus a flat lane-change penalty. Lane
changes announce themselves: the indicator activates at decision time and
lateral motion starts exactly ``indicator_lead`` (3 s) later as a 3 s cosine
blend.

Rollouts are deliberately simple: the ego follows the candidate profile;
every other vehicle follows IDM against the other ambient vehicles (not the
candidate ego motion, so predictions stay exogenous) and executes its
composition label as a blend starting at the horizon start, or continues an
already observed blend. Costs accumulate over samples k = 1..N:

    safety  = sum max(0, d_safe(v_k) - front_gap_k)^2     d_safe = 2 + 1.5 v
    utility = sum (v_k - v_des)^2 * dt
    comfort = sum over segment boundaries (da / seg)^2 * seg

plus 1e6 if any same-lane gap closes to zero. The scalar helpers
(:func:`rollout`, :func:`trajectory_cost`) and the vectorized grid search
perform the same arithmetic in the same order, so their results match
bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .prediction import (BehaviorLabel, ConditionalPrediction, EgoBehavior,
                         SceneComposition, direction_for_label,
                         enumerate_compositions)
from .scenario import PlannerParams
from .world import (LANE_CHANGE_DURATION, SceneState, VehicleState,
                    blend_fraction, idm_accel, world_y)


@dataclass(frozen=True)
class AccelProfile:
    """Piecewise-constant acceleration, one value per 2 s segment."""

    segments: tuple[float, ...]

    def value_at(self, t: float, seg_duration: float = 2.0) -> float:
        idx = int(t // seg_duration)
        if idx < 0:
            idx = 0
        elif idx >= len(self.segments):
            idx = len(self.segments) - 1
        return self.segments[idx]


@dataclass(frozen=True)
class LateralPlan:
    """Cosine-blend lane change inside a rollout, relative to its start."""

    start: float
    duration: float
    from_lane: int
    to_lane: int


@dataclass(frozen=True)
class CandidateTrajectory:
    ego_behavior: EgoBehavior
    profile: AccelProfile
    lateral: Optional[LateralPlan] = None  # None for Straight


@dataclass(frozen=True)
class CostBreakdown:
    safety: float
    utility: float
    comfort: float
    maneuver_penalty: float
    collision: bool
    total: float


@dataclass(frozen=True)
class RolloutTrace:
    """Sampled kinematics of one candidate against one composition."""

    times: tuple[float, ...]
    ego_s: tuple[float, ...]
    ego_v: tuple[float, ...]
    ego_y: tuple[float, ...]
    ego_lane: tuple[int, ...]
    front_gap: tuple[float, ...]  # per sample, inf with no leader
    rear_gap: tuple[float, ...]
    vehicles: dict[str, tuple[tuple[float, float, int], ...]]  # id -> (s, v, lane)


@dataclass(frozen=True)
class ManeuverPlan:
    """Selected behavior plus the profile to execute until the next replan."""

    behavior: EgoBehavior
    profile: AccelProfile
    expected_cost: float
    breakdown: CostBreakdown
    indicator: int  # 0 off, +1 left, -1 right
    created_time: float
    activation_time: Optional[float]
    lateral_start_time: Optional[float]
    samples: tuple[tuple[float, float, float, float], ...]  # (t, s, y, v)


# ---------- ambient rollout ----------

def _ambient_rollout(scene: SceneState, composition: SceneComposition,
                     n: int, dt: float):
    """Integrate every non-ego vehicle over the horizon.

    Returns a list (sorted by vehicle id) of dicts with per-sample arrays
    ``s``, ``v``, ``lane`` plus the vehicle length. Labels Change* start
    their blend at the horizon start; a vehicle already mid-change continues
    its observed blend regardless of label. IDM reacts to the other ambient
    vehicles only.
    """
    road = scene.road
    vehicles = sorted(scene.traffic, key=lambda v: v.id)
    states = []
    for veh in vehicles:
        label = composition.label_for(veh.id)
        if veh.active_change is not None:
            ac = veh.active_change
            blend = (ac.direction, ac.from_lane, ac.elapsed)
        elif label is not BehaviorLabel.KEEP:
            direction = direction_for_label(label)
            target = veh.lane_index + direction
            blend = (direction, veh.lane_index, 0.0) if 0 <= target < road.lane_count else None
        else:
            blend = None
        states.append({
            "veh": veh, "blend": blend,
            "s": [veh.s], "v": [veh.v], "lane": [veh.lane_index],
            "y": world_y(road, veh),
        })

    for k in range(1, n + 1):
        prev = [(st["s"][k - 1], st["v"][k - 1], st["lane"][k - 1]) for st in states]
        for i, st in enumerate(states):
            veh: VehicleState = st["veh"]
            s_prev, v_prev, lane_prev = prev[i]
            lanes = {lane_prev}
            blend = st["blend"]
            elapsed_prev = None
            if blend is not None:
                elapsed_prev = blend[2] + (k - 1) * dt
                if elapsed_prev < LANE_CHANGE_DURATION:
                    lanes.add(blend[1] + blend[0])
            # nearest leader per considered lane, most cautious accel wins
            a = None
            for lane in sorted(lanes):
                gap, v_lead = math.inf, 0.0
                for j, other in enumerate(states):
                    if j == i or prev[j][2] != lane or prev[j][0] < s_prev:
                        continue
                    g = (prev[j][0] - 0.5 * other["veh"].length) - (s_prev + 0.5 * veh.length)
                    if g < gap:
                        gap, v_lead = g, prev[j][1]
                cand = idm_accel(v_prev, veh.v_des, gap, v_lead, veh.idm)
                a = cand if a is None else min(a, cand)
            v_new = max(0.0, v_prev + a * dt)
            s_new = s_prev + v_new * dt
            if blend is not None:
                elapsed = blend[2] + k * dt
                y0 = road.lane_center(blend[1])
                y1 = road.lane_center(blend[1] + blend[0])
                y = y0 + (y1 - y0) * blend_fraction(elapsed)
                st["y"] = y
                lane_new = road.nearest_lane(y)
            else:
                lane_new = lane_prev
            st["s"].append(s_new)
            st["v"].append(v_new)
            st["lane"].append(lane_new)
    return states


def _ego_lateral_path(scene: SceneState, candidate: CandidateTrajectory,
                      n: int, dt: float) -> tuple[list[float], list[int]]:
    """Ego lateral position and occupied lane per sample (profile independent)."""
    road = scene.road
    y0 = world_y(road, scene.ego)
    ys, lanes = [], []
    lat = candidate.lateral
    for k in range(n + 1):
        t = k * dt
        if lat is None or t <= lat.start:
            y = y0
        else:
            frac = blend_fraction(t - lat.start, lat.duration)
            y = y0 + (road.lane_center(lat.to_lane) - road.lane_center(lat.from_lane)) * frac
        ys.append(y)
        lanes.append(road.nearest_lane(y))
    return ys, lanes


def _seg_index(t: float, seg_duration: float, count: int) -> int:
    idx = int(t // seg_duration)
    return count - 1 if idx >= count else idx


# ---------- scalar rollout and cost ----------

def rollout(scene: SceneState, composition: SceneComposition,
            candidate: CandidateTrajectory, dt: float = 0.25,
            horizon: float = 8.0) -> RolloutTrace:
    """Integrate one candidate against one composition over the horizon."""
    n = int(round(horizon / dt))
    amb = _ambient_rollout(scene, composition, n, dt)
    ys, ego_lanes = _ego_lateral_path(scene, candidate, n, dt)
    half_ego = 0.5 * scene.ego.length
    seg = candidate.profile.segments
    seg_dur = horizon / len(seg)

    s, v = scene.ego.s, scene.ego.v
    ego_s, ego_v = [s], [v]
    front, rear = [], []

    def gaps(k: int, s_now: float) -> tuple[float, float]:
        fg, rg = math.inf, math.inf
        lane = ego_lanes[k]
        for st in amb:
            if st["lane"][k] != lane:
                continue
            s_o = st["s"][k]
            half_o = 0.5 * st["veh"].length
            if s_o >= s_now:
                g = (s_o - half_o) - (s_now + half_ego)
                if g < fg:
                    fg = g
            else:
                g = (s_now - half_ego) - (s_o + half_o)
                if g < rg:
                    rg = g
        return fg, rg

    fg0, rg0 = gaps(0, s)
    front.append(fg0)
    rear.append(rg0)
    for k in range(1, n + 1):
        a = seg[_seg_index((k - 1) * dt, seg_dur, len(seg))]
        v = max(0.0, v + a * dt)
        s = s + v * dt
        ego_s.append(s)
        ego_v.append(v)
        fg, rg = gaps(k, s)
        front.append(fg)
        rear.append(rg)

    times = tuple(k * dt for k in range(n + 1))
    vehicles = {st["veh"].id: tuple(zip(st["s"], st["v"], st["lane"]))
                for st in amb}
    return RolloutTrace(times=times, ego_s=tuple(ego_s), ego_v=tuple(ego_v),
                        ego_y=tuple(ys), ego_lane=tuple(ego_lanes),
                        front_gap=tuple(front), rear_gap=tuple(rear),
                        vehicles=vehicles)


def trajectory_cost(scene: SceneState, composition: SceneComposition,
                    candidate: CandidateTrajectory,
                    params: PlannerParams = PlannerParams()) -> CostBreakdown:
    """Score one candidate. Mirrors the vectorized grid search exactly."""
    trace = rollout(scene, composition, candidate,
                    dt=params.rollout_dt, horizon=params.horizon)
    n = len(trace.times) - 1
    v_des = scene.ego.v_des
    safety = 0.0
    utility = 0.0
    collided = False
    for k in range(1, n + 1):
        v = trace.ego_v[k]
        fg, rg = trace.front_gap[k], trace.rear_gap[k]
        if fg <= 0.0 or rg <= 0.0:
            collided = True
        sf = max(0.0, (params.standstill + params.headway * v) - fg)
        safety += sf * sf
        du = v - v_des
        utility += du * du * params.rollout_dt
    seg = candidate.profile.segments
    seg_dur = params.horizon / len(seg)
    comfort = 0.0
    for i in range(len(seg) - 1):
        d = (seg[i + 1] - seg[i]) / seg_dur
        comfort += d * d * seg_dur
    penalty = 0.0 if candidate.ego_behavior is EgoBehavior.STRAIGHT else params.penalty
    total = (params.w_safety * safety + params.w_utility * utility
             + params.w_comfort * comfort + penalty)
    if collided:
        total = total + params.collision_penalty
    return CostBreakdown(safety=safety, utility=utility, comfort=comfort,
                         maneuver_penalty=penalty, collision=collided,
                         total=total)


# ---------- vectorized grid search ----------

def _build_candidate(scene: SceneState, behavior: EgoBehavior,
                     profile: AccelProfile,
                     params: PlannerParams) -> CandidateTrajectory:
    if behavior is EgoBehavior.STRAIGHT:
        return CandidateTrajectory(behavior, profile, None)
    direction = 1 if behavior is EgoBehavior.LANE_CHANGE_LEFT else -1
    lat = LateralPlan(start=params.indicator_lead,
                      duration=LANE_CHANGE_DURATION,
                      from_lane=scene.ego.lane_index,
                      to_lane=scene.ego.lane_index + direction)
    return CandidateTrajectory(behavior, profile, lat)


def optimize_trajectory(scene: SceneState, composition: SceneComposition,
                        ego_behavior: EgoBehavior,
                        params: PlannerParams = PlannerParams(),
                        ) -> tuple[CandidateTrajectory, CostBreakdown]:
    """Exhaustive search over the acceleration grid for one composition.

    Every profile in ``grid^segments`` is rolled out; the cheapest wins, ties
    resolved by profile enumeration order (the grid lists values nearest zero
    first, so earlier segments prefer gentler acceleration).
    """
    dt = params.rollout_dt
    n = int(round(params.horizon / dt))
    seg_count = max(1, int(round(params.horizon / params.seg_duration)))
    profiles = list(itertools.product(params.grid, repeat=seg_count))
    a_grid = np.array(profiles, dtype=np.float64)
    p_count = a_grid.shape[0]

    shell = _build_candidate(scene, ego_behavior,
                             AccelProfile(profiles[0]), params)
    amb = _ambient_rollout(scene, composition, n, dt)
    _, ego_lanes = _ego_lateral_path(scene, shell, n, dt)
    half_ego = 0.5 * scene.ego.length
    v_des = scene.ego.v_des

    v = np.full(p_count, scene.ego.v)
    s = np.full(p_count, scene.ego.s)
    safety = np.zeros(p_count)
    utility = np.zeros(p_count)
    collided = np.zeros(p_count, dtype=bool)

    for k in range(1, n + 1):
        a = a_grid[:, _seg_index((k - 1) * dt, params.seg_duration, seg_count)]
        v = np.maximum(0.0, v + a * dt)
        s = s + v * dt
        lane = ego_lanes[k]
        front = np.full(p_count, np.inf)
        rear = np.full(p_count, np.inf)
        for st in amb:
            if st["lane"][k] != lane:
                continue
            s_o = st["s"][k]
            half_o = 0.5 * st["veh"].length
            ahead = s_o >= s
            front = np.minimum(front, np.where(ahead, (s_o - half_o) - (s + half_ego), np.inf))
            rear = np.minimum(rear, np.where(ahead, np.inf, (s - half_ego) - (s_o + half_o)))
        collided |= (front <= 0.0) | (rear <= 0.0)
        sf = np.maximum(0.0, (params.standstill + params.headway * v) - front)
        safety += sf * sf
        du = v - v_des
        utility += du * du * dt

    comfort = np.zeros(p_count)
    for i in range(seg_count - 1):
        d = (a_grid[:, i + 1] - a_grid[:, i]) / params.seg_duration
        comfort += d * d * params.seg_duration
    penalty = 0.0 if ego_behavior is EgoBehavior.STRAIGHT else params.penalty
    total = (params.w_safety * safety + params.w_utility * utility
             + params.w_comfort * comfort + penalty)
    total = total + params.collision_penalty * collided

    best = int(np.argmin(total))
    profile = AccelProfile(profiles[best])
    breakdown = CostBreakdown(
        safety=float(safety[best]), utility=float(utility[best]),
        comfort=float(comfort[best]), maneuver_penalty=penalty,
        collision=bool(collided[best]), total=float(total[best]))
    return _build_candidate(scene, ego_behavior, profile, params), breakdown


# ---------- behavior selection ----------

def _feasible_behaviors(scene: SceneState) -> list[EgoBehavior]:
    out = [EgoBehavior.STRAIGHT]
    if scene.ego.lane_index + 1 < scene.road.lane_count:
        out.append(EgoBehavior.LANE_CHANGE_LEFT)
    if scene.ego.lane_index - 1 >= 0:
        out.append(EgoBehavior.LANE_CHANGE_RIGHT)
    return out


_TIE_ORDER = {EgoBehavior.STRAIGHT: 0, EgoBehavior.LANE_CHANGE_LEFT: 1,
              EgoBehavior.LANE_CHANGE_RIGHT: 2}


def select_behavior(scene: SceneState,
                    predictions: Sequence[ConditionalPrediction],
                    params: PlannerParams = PlannerParams(),
                    max_compositions: int = 8) -> ManeuverPlan:
    """Pick the behavior with minimal expected cost over its compositions.

    ``predictions`` must already carry any intervention overrides; the
    planner sees nothing else. The executed profile is the optimizer's
    output for the most probable composition of the winning behavior. Ties
    prefer Straight, then LaneChangeLeft.
    """
    best = None
    for behavior in _feasible_behaviors(scene):
        comps = enumerate_compositions(predictions, behavior, max_compositions)
        expected = 0.0
        top = None
        for idx, comp in enumerate(comps):
            candidate, breakdown = optimize_trajectory(scene, comp, behavior, params)
            expected += comp.probability * breakdown.total
            if idx == 0:  # compositions come sorted, first is most probable
                top = (candidate, breakdown)
        key = (expected, _TIE_ORDER[behavior])
        if best is None or key < best[0]:
            best = (key, behavior, top, expected)

    _, behavior, (candidate, breakdown), expected = best
    # re-sample the winning candidate against its top composition for display
    comps = enumerate_compositions(predictions, behavior, max_compositions)
    trace = rollout(scene, comps[0], candidate,
                    dt=params.rollout_dt, horizon=params.horizon)
    samples = tuple(zip((scene.time + t for t in trace.times),
                        trace.ego_s, trace.ego_y, trace.ego_v))

    if behavior is EgoBehavior.STRAIGHT:
        indicator, activation, lateral_start = 0, None, None
    else:
        indicator = 1 if behavior is EgoBehavior.LANE_CHANGE_LEFT else -1
        activation = scene.time
        lateral_start = scene.time + params.indicator_lead
    return ManeuverPlan(behavior=behavior, profile=candidate.profile,
                        expected_cost=expected, breakdown=breakdown,
                        indicator=indicator, created_time=scene.time,
                        activation_time=activation,
                        lateral_start_time=lateral_start, samples=samples)
