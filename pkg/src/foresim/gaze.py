"""Gaze-referenced vehicle selection.

A screen click (or gaze point) becomes a world ray through a pinhole chase
camera. Each candidate vehicle is scored by its angular offset ``alpha`` from
the ray measured at the ray origin, reported as ``e = sin(alpha)``: with
``w`` the vector from the origin to the vehicle's reference point,

    e = |d x w| / |w|

for unit ray direction ``d``. Normalizing by ``|w|`` is what removes the
proximity bias: a distant vehicle near the line of sight beats a close one
that is angularly further away, even if the close one is fewer meters from
the ray. Vehicles behind the gaze (alpha > pi/2) are never selectable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .prediction import BehaviorLabel
from .world import RoadModel, SceneState, VehicleState, relevant_vehicles, world_y

# camera rig relative to the ego reference point
EYE_BACK = 12.0  # m behind
EYE_UP = 4.0  # m above
PITCH_DEG = 8.0  # looking down
HFOV_DEG = 60.0
TARGET_HEIGHT = 0.75  # m, vehicle reference point above the road
MIN_TARGET_DISTANCE = 0.1  # m, closer targets are degenerate


class OutOfScreen(Exception):
    """Normalized screen coordinates fell outside [0, 1]."""


class DegenerateTarget(Exception):
    """Target vehicle (nearly) coincides with the ray origin."""


class NoSelectableVehicle(Exception):
    """No relevant vehicle lies within a quarter turn of the gaze ray."""


class AmbiguousDirection(Exception):
    """Selected vehicle shares the ego lane; no cut-in direction follows."""


def _norm(v: tuple[float, float, float]) -> tuple[float, float, float]:
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    return (v[0] / n, v[1] / n, v[2] / n)


def _cross(a, b) -> tuple[float, float, float]:
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def _dot(a, b) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@dataclass(frozen=True)
class CameraModel:
    """Pinhole chase camera. ``forward``/``up`` are unit vectors."""

    eye: tuple[float, float, float]
    forward: tuple[float, float, float]
    up: tuple[float, float, float]
    hfov_deg: float = HFOV_DEG
    aspect: float = 16.0 / 9.0


def camera_for_ego(road: RoadModel, ego: VehicleState,
                   aspect: float = 16.0 / 9.0) -> CameraModel:
    """Chase camera 12 m behind and 4 m above the ego, pitched down 8 deg."""
    pitch = math.radians(PITCH_DEG)
    eye = (ego.s - EYE_BACK, world_y(road, ego), EYE_UP)
    forward = (math.cos(pitch), 0.0, -math.sin(pitch))
    up = (math.sin(pitch), 0.0, math.cos(pitch))
    return CameraModel(eye=eye, forward=forward, up=up, aspect=aspect)


@dataclass(frozen=True)
class GazeRay:
    """Origin + unit direction in world coordinates."""

    origin: tuple[float, float, float]
    direction: tuple[float, float, float]

    @classmethod
    def from_raw(cls, origin, direction) -> "GazeRay":
        return cls(tuple(origin), _norm(tuple(direction)))


def screen_to_ray(camera: CameraModel, u: float, v: float) -> GazeRay:
    """Invert the pinhole projection for a normalized screen point.

    (u, v) use the top-left origin: u grows rightward, v downward. Raises
    :class:`OutOfScreen` outside the unit square.
    """
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise OutOfScreen(f"({u}, {v}) outside the unit square")
    tan_h = math.tan(math.radians(camera.hfov_deg) / 2.0)
    tan_v = tan_h / camera.aspect
    x = (2.0 * u - 1.0) * tan_h
    y = (1.0 - 2.0 * v) * tan_v
    f, up = camera.forward, camera.up
    right = _cross(f, up)
    d = (f[0] + x * right[0] + y * up[0],
         f[1] + x * right[1] + y * up[1],
         f[2] + x * right[2] + y * up[2])
    return GazeRay(camera.eye, _norm(d))


@dataclass(frozen=True)
class BearingError:
    """Per-vehicle angular score of a gaze ray."""

    vehicle_id: str
    alpha: float  # rad, angle between ray and origin->target
    e: float  # sin(alpha), the selection metric


def _target_point(road: RoadModel, vehicle: VehicleState) -> tuple[float, float, float]:
    return (vehicle.s, world_y(road, vehicle), TARGET_HEIGHT)


def bearing_error(ray: GazeRay, vehicle: VehicleState,
                  road: RoadModel) -> BearingError:
    """Angular offset of one vehicle from the gaze ray.

    Raises :class:`DegenerateTarget` when the target sits on the ray origin
    (|w| < 0.1 m), where the angle is undefined.
    """
    t = _target_point(road, vehicle)
    w = (t[0] - ray.origin[0], t[1] - ray.origin[1], t[2] - ray.origin[2])
    w_len = math.sqrt(_dot(w, w))
    if w_len < MIN_TARGET_DISTANCE:
        raise DegenerateTarget(vehicle.id)
    c = _cross(ray.direction, w)
    c_len = math.sqrt(_dot(c, c))
    alpha = math.atan2(c_len, _dot(ray.direction, w))
    return BearingError(vehicle_id=vehicle.id, alpha=alpha, e=c_len / w_len)


def select_vehicle(ray: GazeRay, scene: SceneState) -> VehicleState:
    """Pick the relevant vehicle with minimal bearing error.

    Only vehicles within the relevance window and with alpha <= pi/2 compete.
    Ties fall to the smaller ego distance, then the smaller id. Raises
    :class:`NoSelectableVehicle` when nothing qualifies.
    """
    ego = scene.ego
    best = None
    best_key = None
    for veh in relevant_vehicles(scene):
        try:
            be = bearing_error(ray, veh, scene.road)
        except DegenerateTarget:
            continue
        if be.alpha > 0.5 * math.pi:
            continue
        dy = world_y(scene.road, veh) - world_y(scene.road, ego)
        key = (be.e, math.hypot(veh.s - ego.s, dy), veh.id)
        if best_key is None or key < best_key:
            best, best_key = veh, key
    if best is None:
        raise NoSelectableVehicle("no relevant vehicle within a quarter turn of the gaze")
    return best


def infer_direction(selected: VehicleState, ego: VehicleState) -> BehaviorLabel:
    """Cut-in direction communicated by pointing at a vehicle.

    A vehicle on a lane right of the ego announces ChangeLeft (it would cut
    in toward the ego), and vice versa. Raises :class:`AmbiguousDirection`
    for vehicles sharing the ego lane.
    """
    if selected.lane_index < ego.lane_index:
        return BehaviorLabel.CHANGE_LEFT
    if selected.lane_index > ego.lane_index:
        return BehaviorLabel.CHANGE_RIGHT
    raise AmbiguousDirection(selected.id)
