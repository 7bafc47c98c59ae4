"""Straight multi-lane highway world: vehicle states, IDM car following, fixed-step dynamics.

Conventions used throughout the package:

* the road runs along +x; ``s`` is the longitudinal position of a vehicle's
  geometric center in meters,
* lane 0 is the rightmost lane, lane indices grow to the left,
* ``lateral_offset`` is measured from the center of ``lane_index`` in meters,
  positive toward the left; a vehicle's continuous lateral position is
  ``lane_index * lane_width + lateral_offset``,
* all speeds are m/s, accelerations m/s^2, times s.

Stepping is semi-implicit Euler at a fixed dt and is fully deterministic:
``step_world`` is a pure function of the previous snapshot and the ego
controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

# ---------- constants ----------

EMERGENCY_DECEL = 9.0  # m/s^2, floor for any commanded braking
MERGE_STOP_MARGIN = 0.5  # m kept between front bumper and merge end when blocked
LANE_CHANGE_DURATION = 3.0  # s, cosine blend for every lane change
MERGE_FORCE_HORIZON = 3.0  # s of travel left on the ramp before a merge is forced
MERGE_FORCE_MIN = 15.0  # m, lower bound for the forcing distance

VEHICLE_DIMENSIONS = {
    # kind: (length, width) in meters
    "car": (4.5, 1.8),
    "truck": (12.0, 2.5),
    "van": (5.5, 2.0),
    "sports_car": (4.2, 1.8),
}

RELEVANCE_BEHIND = 30.0  # m behind the ego still considered interactive
RELEVANCE_AHEAD = 150.0  # m ahead of the ego still considered interactive


@dataclass(frozen=True)
class IDMParams:
    """Intelligent Driver Model parameters (per vehicle)."""

    a_max: float = 1.5  # maximum acceleration
    b: float = 2.0  # comfortable deceleration
    T: float = 1.5  # desired time headway
    s0: float = 2.0  # standstill distance
    delta: float = 4.0  # velocity exponent


DEFAULT_IDM = IDMParams()


def idm_accel(v: float, v_des: float, gap: float, v_lead: float,
              p: IDMParams = DEFAULT_IDM) -> float:
    """IDM acceleration for a follower at speed ``v`` toward a leader.

    ``gap`` is the net (bumper to bumper) distance; pass ``math.inf`` for free
    road. The returned value is floored at -EMERGENCY_DECEL.
    """
    v_des = max(v_des, 0.1)
    free = 1.0 - (v / v_des) ** p.delta
    if math.isinf(gap):
        a = p.a_max * free
    else:
        gap = max(gap, 0.1)  # keep the interaction term finite
        s_star = p.s0 + v * p.T + v * (v - v_lead) / (2.0 * math.sqrt(p.a_max * p.b))
        a = p.a_max * (free - (s_star / gap) ** 2)
    return max(a, -EMERGENCY_DECEL)


# ---------- road ----------

@dataclass(frozen=True)
class RoadModel:
    """Straight road: parallel lanes plus optional merge (ramp) sections.

    A merge section ``(lane, s_start, s_end)`` marks that ``lane`` ceases to
    exist past ``s_end``; vehicles on it must leave before that point.
    """

    lane_count: int
    lane_width: float = 3.5
    merge_sections: tuple[tuple[int, float, float], ...] = ()

    def lane_center(self, lane_index: int) -> float:
        return lane_index * self.lane_width

    def merge_section_at(self, lane_index: int, s: float) -> Optional[tuple[float, float]]:
        for lane, s0, s1 in self.merge_sections:
            if lane == lane_index and s0 <= s <= s1:
                return (s0, s1)
        return None

    def nearest_lane(self, y: float) -> int:
        # lane boundary midpoints decide; exact boundary resolves upward
        lane = math.floor(y / self.lane_width + 0.5)
        return min(max(lane, 0), self.lane_count - 1)


# ---------- vehicles ----------

@dataclass(frozen=True)
class ActiveLaneChange:
    """An in-progress lane change: +1 lane index for left, -1 for right."""

    direction: int
    from_lane: int
    elapsed: float


@dataclass(frozen=True)
class ScriptedChange:
    """One-shot timed lane change for an ambient vehicle."""

    time: float
    direction: int  # +1 left, -1 right


@dataclass(frozen=True)
class VehicleState:
    """Kinematic snapshot of one vehicle."""

    id: str
    kind: str
    s: float
    lane_index: int
    v: float
    lateral_offset: float = 0.0
    a: float = 0.0
    length: float = 4.5
    width: float = 1.8
    v_des: float = 30.0
    idm: IDMParams = DEFAULT_IDM
    scripted: tuple[ScriptedChange, ...] = ()
    active_change: Optional[ActiveLaneChange] = None

    def front(self) -> float:
        return self.s + 0.5 * self.length

    def rear(self) -> float:
        return self.s - 0.5 * self.length


def world_y(road: RoadModel, vehicle: VehicleState) -> float:
    """Continuous lateral position of a vehicle (m, 0 at lane-0 center)."""
    return road.lane_center(vehicle.lane_index) + vehicle.lateral_offset


def net_gap(follower: VehicleState, leader: VehicleState) -> float:
    """Bumper-to-bumper distance from follower's front to leader's rear."""
    return leader.rear() - follower.front()


# ---------- scene ----------

@dataclass(frozen=True)
class SceneState:
    """Immutable world snapshot at one tick. ``time == tick * dt`` exactly."""

    time: float
    tick: int
    road: RoadModel
    ego: VehicleState
    traffic: tuple[VehicleState, ...]
    active_plan: object = None
    interventions: tuple = ()

    def vehicle(self, vehicle_id: str) -> VehicleState:
        for veh in self.traffic:
            if veh.id == vehicle_id:
                return veh
        raise KeyError(vehicle_id)


def relevant_vehicles(scene: SceneState) -> list[VehicleState]:
    """Traffic inside the interaction window around the ego, ordered by id.

    The window is the closed interval ``s - ego.s in [-30, +150]`` meters:
    anything further is neither predicted nor selectable.
    """
    out = [v for v in scene.traffic
           if -RELEVANCE_BEHIND <= v.s - scene.ego.s <= RELEVANCE_AHEAD]
    out.sort(key=lambda v: v.id)
    return out


# ---------- lane-change blend ----------

def blend_fraction(elapsed: float, duration: float = LANE_CHANGE_DURATION) -> float:
    """Cosine blend progress in [0, 1]; 0.5 exactly at mid-change."""
    if elapsed <= 0.0:
        return 0.0
    if elapsed >= duration:
        return 1.0
    return 0.5 * (1.0 - math.cos(math.pi * elapsed / duration))


def _lane_from_y(road: RoadModel, y: float) -> tuple[int, float]:
    lane = road.nearest_lane(y)
    return lane, y - road.lane_center(lane)


# ---------- stepping ----------

def _leader_in_lane(scene: SceneState, veh: VehicleState, lane: int,
                    include_ego: bool) -> Optional[VehicleState]:
    """Nearest vehicle ahead of ``veh`` occupying ``lane`` (by lane_index)."""
    best = None
    pool: list[VehicleState] = [v for v in scene.traffic if v.id != veh.id]
    if include_ego and scene.ego.id != veh.id:
        pool.append(scene.ego)
    for other in pool:
        if other.lane_index != lane or other.s < veh.s:
            continue
        if best is None or other.s < best.s:
            best = other
    return best


def _follow_accel(scene: SceneState, veh: VehicleState, lane: int) -> float:
    leader = _leader_in_lane(scene, veh, lane, include_ego=True)
    if leader is None:
        return idm_accel(veh.v, veh.v_des, math.inf, 0.0, veh.idm)
    return idm_accel(veh.v, veh.v_des, net_gap(veh, leader), leader.v, veh.idm)


def merge_gap_ok(scene: SceneState, veh: VehicleState, target_lane: int) -> bool:
    """Whether a forced merge into ``target_lane`` is physically acceptable.

    The new leader must leave full IDM desired spacing; the new follower only
    needs the standstill margin (merging traffic expects upstream vehicles to
    yield). Any longitudinal overlap rejects the merge outright.
    """
    pool = [v for v in scene.traffic if v.id != veh.id]
    pool.append(scene.ego)
    for other in pool:
        if other.lane_index != target_lane:
            continue
        if other.s >= veh.s:
            p = veh.idm
            s_star = p.s0 + veh.v * p.T + veh.v * (veh.v - other.v) / (2.0 * math.sqrt(p.a_max * p.b))
            if net_gap(veh, other) < max(s_star, p.s0):
                return False
        else:
            if net_gap(other, veh) < other.idm.s0:
                return False
    return True


def _step_ambient(scene: SceneState, veh: VehicleState, dt: float,
                  new_time: float) -> VehicleState:
    road = scene.road
    change = veh.active_change

    # -- decide whether a lane change starts this step --
    if change is None:
        for trig in veh.scripted:
            if scene.time < trig.time <= new_time:
                target = veh.lane_index + trig.direction
                if 0 <= target < road.lane_count:
                    change = ActiveLaneChange(trig.direction, veh.lane_index, 0.0)
                break
    forced_block = False
    section = road.merge_section_at(veh.lane_index, veh.s)
    if change is None and section is not None:
        remaining = section[1] - veh.s
        if remaining < max(MERGE_FORCE_HORIZON * veh.v, MERGE_FORCE_MIN):
            target = veh.lane_index + 1 if veh.lane_index + 1 < road.lane_count else veh.lane_index - 1
            if 0 <= target < road.lane_count and merge_gap_ok(scene, veh, target):
                change = ActiveLaneChange(1 if target > veh.lane_index else -1,
                                          veh.lane_index, 0.0)
            else:
                forced_block = True

    # -- longitudinal --
    if change is not None:
        target_lane = change.from_lane + change.direction
        a = min(_follow_accel(scene, veh, veh.lane_index),
                _follow_accel(scene, veh, target_lane))
    else:
        a = _follow_accel(scene, veh, veh.lane_index)
    if forced_block and section is not None:
        # brake to stop with the front bumper short of the merge end
        dist = (section[1] - MERGE_STOP_MARGIN) - veh.front()
        a_stop = -EMERGENCY_DECEL if dist <= 0.1 else -(veh.v * veh.v) / (2.0 * dist)
        a = min(a, a_stop)

    v_new = max(0.0, veh.v + a * dt)
    s_new = veh.s + v_new * dt
    if forced_block and section is not None and s_new + 0.5 * veh.length > section[1]:
        # last-resort clamp: never drive past the merge end while blocked
        s_new = section[1] - 0.5 * veh.length
        v_new = 0.0

    # -- lateral --
    if change is not None:
        elapsed = change.elapsed + dt
        y0 = road.lane_center(change.from_lane)
        y1 = road.lane_center(change.from_lane + change.direction)
        y = y0 + (y1 - y0) * blend_fraction(elapsed)
        if elapsed >= LANE_CHANGE_DURATION:
            lane_new, off_new = change.from_lane + change.direction, 0.0
            change = None
        else:
            lane_new, off_new = _lane_from_y(road, y)
            change = replace(change, elapsed=elapsed)
    else:
        lane_new, off_new = veh.lane_index, veh.lateral_offset

    return replace(veh, s=s_new, v=v_new, a=a, lane_index=lane_new,
                   lateral_offset=off_new, active_change=change)


def step_world(scene: SceneState, ego_controls: tuple[float, float],
               dt: float) -> SceneState:
    """Advance the world one tick.

    Args:
        scene: previous snapshot; every update reads from it (synchronous).
        ego_controls: (acceleration m/s^2, lateral rate m/s) commanded by the
            planner for this tick.
        dt: step length; ``time`` stays exactly ``tick * dt``.

    Ambient vehicles follow IDM toward the nearest same-lane leader (the ego
    included), run their scripted or forced lane changes as 3 s cosine
    blends, and never reverse. The ego integrates the commanded controls with
    lateral motion clamped at the road edges.
    """
    road = scene.road
    a_cmd, lat_rate = ego_controls
    ego = scene.ego

    v_new = max(0.0, ego.v + a_cmd * dt)
    s_new = ego.s + v_new * dt
    y = world_y(road, ego) + lat_rate * dt
    y = min(max(y, -0.5 * road.lane_width),
            road.lane_center(road.lane_count - 1) + 0.5 * road.lane_width)
    lane_new, off_new = _lane_from_y(road, y)
    ego_new = replace(ego, s=s_new, v=v_new, a=a_cmd, lane_index=lane_new,
                      lateral_offset=off_new)

    new_tick = scene.tick + 1
    new_time = new_tick * dt
    traffic_new = tuple(_step_ambient(scene, veh, dt, new_time)
                        for veh in scene.traffic)
    return replace(scene, time=new_time, tick=new_tick, ego=ego_new,
                   traffic=traffic_new)
