"""Builders and independent oracles shared across the test modules.

Everything here is deliberately written from the documented contracts, not
by calling into the library's internals: the gaze oracle scores by arccos
instead of the cross-product sine, the planner oracle is a plain Python
loop over the profile grid, and the scene builders construct dataclasses
directly.
"""

from __future__ import annotations

import itertools
import math

from foresim.bridge import BridgeSession, load_catalog
from foresim.planner import (AccelProfile, CandidateTrajectory, LateralPlan,
                             trajectory_cost)
from foresim.prediction import BehaviorLabel, EgoBehavior
from foresim.simloop import EPS
from foresim.world import (DEFAULT_IDM, LANE_CHANGE_DURATION,
                           VEHICLE_DIMENSIONS, RoadModel, SceneState,
                           VehicleState, relevant_vehicles, world_y)


# ---------- scene builders ----------

def road(lanes: int = 3, width: float = 3.5, merge=()) -> RoadModel:
    return RoadModel(lane_count=lanes, lane_width=width,
                     merge_sections=tuple(merge))


def vehicle(vid: str, lane: int, s: float, v: float, kind: str = "car",
            v_des: float | None = None, offset: float = 0.0, idm=None,
            scripted=(), active=None) -> VehicleState:
    length, width = VEHICLE_DIMENSIONS[kind]
    return VehicleState(id=vid, kind=kind, s=s, lane_index=lane, v=v,
                        lateral_offset=offset, length=length, width=width,
                        v_des=v if v_des is None else v_des,
                        idm=idm or DEFAULT_IDM, scripted=tuple(scripted),
                        active_change=active)


def scene(ego: VehicleState, traffic=(), road_model: RoadModel | None = None,
          time: float = 0.0, tick: int = 0) -> SceneState:
    return SceneState(time=time, tick=tick, road=road_model or road(),
                      ego=ego, traffic=tuple(traffic))


# ---------- gaze oracle ----------

def gaze_oracle(ray, scn: SceneState) -> VehicleState | None:
    """Brute-force minimal-angle selection; None when nothing qualifies.

    Scores by alpha = arccos(d.w / |w|) rather than the library's
    atan2(|d x w|, d.w), so agreement is a genuine cross-check.
    """
    best = None
    best_key = None
    for veh in relevant_vehicles(scn):
        target = (veh.s, world_y(scn.road, veh), 0.75)
        w = tuple(target[i] - ray.origin[i] for i in range(3))
        norm = math.sqrt(sum(c * c for c in w))
        if norm < 0.1:
            continue
        cos_a = sum(d * c for d, c in zip(ray.direction, w)) / norm
        alpha = math.acos(min(1.0, max(-1.0, cos_a)))
        if alpha > 0.5 * math.pi:
            continue
        dy = world_y(scn.road, veh) - world_y(scn.road, scn.ego)
        key = (alpha, math.hypot(veh.s - scn.ego.s, dy), veh.id)
        if best_key is None or key < best_key:
            best, best_key = veh, key
    return best


def random_gaze_scene(rng):
    """One randomized scene + ray for the selection oracle, <= 10 vehicles."""
    from foresim.gaze import GazeRay
    lanes = int(rng.integers(2, 5))
    rd = RoadModel(lane_count=lanes, lane_width=3.5)
    ego_lane = int(rng.integers(0, lanes))
    ego_s = float(rng.uniform(0.0, 200.0))
    ego = vehicle("ego", ego_lane, ego_s, 30.0)
    count = int(rng.integers(1, 11))
    traffic = []
    for i in range(count):
        traffic.append(vehicle(
            f"v{i:02d}", int(rng.integers(0, lanes)),
            ego_s + float(rng.uniform(-60.0, 200.0)),
            float(rng.uniform(0.0, 35.0)),
            offset=float(rng.uniform(-1.5, 1.5))))
    scn = scene(ego, traffic, rd)
    origin = (ego_s - 12.0 + float(rng.uniform(-5.0, 5.0)),
              float(rng.uniform(-2.0, 2.0 + 3.5 * lanes)),
              float(rng.uniform(0.5, 6.0)))
    direction = rng.normal(size=3)
    while float(sum(d * d for d in direction)) < 1e-6:
        direction = rng.normal(size=3)
    ray = GazeRay.from_raw(origin, tuple(float(d) for d in direction))
    return ray, scn


# ---------- planner oracle ----------

def build_candidate(scn: SceneState, behavior: EgoBehavior,
                    profile: AccelProfile, params) -> CandidateTrajectory:
    if behavior is EgoBehavior.STRAIGHT:
        return CandidateTrajectory(behavior, profile, None)
    direction = 1 if behavior is EgoBehavior.LANE_CHANGE_LEFT else -1
    lateral = LateralPlan(start=params.indicator_lead,
                          duration=LANE_CHANGE_DURATION,
                          from_lane=scn.ego.lane_index,
                          to_lane=scn.ego.lane_index + direction)
    return CandidateTrajectory(behavior, profile, lateral)


def brute_force_optimum(scn: SceneState, composition, behavior: EgoBehavior,
                        params):
    """Exhaustive scalar search over the full profile grid, first minimum wins."""
    seg_count = max(1, int(round(params.horizon / params.seg_duration)))
    best = None
    for segments in itertools.product(params.grid, repeat=seg_count):
        candidate = build_candidate(scn, behavior, AccelProfile(segments),
                                    params)
        cost = trajectory_cost(scn, composition, candidate, params)
        if best is None or cost.total < best[1].total:
            best = (candidate, cost)
    return best


# ---------- bridge-equivalence driver ----------

def bridge_run(scenario_dir, name: str, script):
    """Drive a BridgeSession with InterveneById events mirroring a script.

    Events are staged at the same tick boundary the harness would apply
    them (first tick whose scene time has reached the entry time), then the
    session is ticked to completion.
    """
    catalog = load_catalog(scenario_dir)
    session = BridgeSession(catalog, name)
    pending = sorted(script, key=lambda e: e.time)
    i = 0
    while not session.finished:
        while i < len(pending) and pending[i].time <= session.loop.scene.time + EPS:
            entry = pending[i]
            side = "left" if entry.direction is BehaviorLabel.CHANGE_LEFT else "right"
            ack = session.handle_event({"type": "intervene_by_id",
                                        "vehicle_id": entry.vehicle_id,
                                        "direction": side})
            assert ack["ok"], ack
            i += 1
        session.tick()
    return session.metrics()


# ---------- misc helpers ----------

def ambient_lateral_start(loop, vehicle_id: str) -> float | None:
    """Conservative start time of a traffic vehicle's first lateral motion.

    Per-tick records snapshot the scene at tick start, so a change firing
    inside step k first shows in record k+1; the motion began during step k.
    """
    for row in loop.rows:
        veh = row.scene.vehicle(vehicle_id)
        if veh.active_change is not None or veh.lateral_offset != 0.0:
            return row.time - loop.config.dt
    return None


def project_to_screen(camera, point) -> tuple[float, float]:
    """Forward pinhole projection, the inverse of screen_to_ray."""
    w = tuple(point[i] - camera.eye[i] for i in range(3))
    f, up = camera.forward, camera.up
    right = (f[1] * up[2] - f[2] * up[1],
             f[2] * up[0] - f[0] * up[2],
             f[0] * up[1] - f[1] * up[0])
    x = sum(a * b for a, b in zip(w, right))
    y = sum(a * b for a, b in zip(w, up))
    z = sum(a * b for a, b in zip(w, f))
    tan_h = math.tan(math.radians(camera.hfov_deg) / 2.0)
    tan_v = tan_h / camera.aspect
    u = 0.5 * (x / (z * tan_h) + 1.0)
    v = 0.5 * (1.0 - y / (z * tan_v))
    return u, v
