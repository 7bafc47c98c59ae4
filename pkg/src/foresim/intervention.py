"""Human prediction injection: records, overrides, expiry.

An intervention never touches the planner or the world directly. It only
pins the selected vehicle's maneuver distribution to a point mass (for every
conditioning ego behavior), and the planner reacts to that like to any other
prediction. Records live until the scene changes materially: the vehicle
leaves the relevance window, or it finishes the announced lane change.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .prediction import (BehaviorLabel, ConditionalPrediction, EGO_BEHAVIORS,
                         direction_for_label)
from .world import SceneState, VehicleState, relevant_vehicles

SETTLED_OFFSET = 0.2  # m, |lateral_offset| below this counts as lane centered


class VehicleNotRelevant(Exception):
    """Target vehicle is outside the interaction window."""


class InvalidDirection(Exception):
    """Injected maneuver would leave the road."""


@dataclass(frozen=True)
class InterventionRecord:
    """One active injected prediction."""

    vehicle_id: str
    direction: BehaviorLabel  # CHANGE_LEFT or CHANGE_RIGHT
    created_time: float
    source_lane: int  # vehicle's lane when injected


def inject(scene: SceneState, vehicle_id: str, direction: BehaviorLabel,
           records: Sequence[InterventionRecord]) -> list[InterventionRecord]:
    """Add (or replace) the injected prediction for one vehicle.

    The vehicle must be inside the relevance window and the announced target
    lane must exist. A newer injection for the same vehicle wins. Returns the
    new record list; the input is not modified.
    """
    veh = None
    for candidate in relevant_vehicles(scene):
        if candidate.id == vehicle_id:
            veh = candidate
            break
    if veh is None:
        raise VehicleNotRelevant(vehicle_id)
    target = veh.lane_index + direction_for_label(direction)
    if not 0 <= target < scene.road.lane_count:
        raise InvalidDirection(f"{vehicle_id}: {direction.value} leaves the road")
    record = InterventionRecord(vehicle_id=vehicle_id, direction=direction,
                                created_time=scene.time,
                                source_lane=veh.lane_index)
    return [r for r in records if r.vehicle_id != vehicle_id] + [record]


def apply_overrides(predictions: Sequence[ConditionalPrediction],
                    records: Sequence[InterventionRecord],
                    ) -> list[ConditionalPrediction]:
    """Replace predicted distributions with injected point masses.

    Only vehicles present in ``predictions`` are touched; an override applies
    uniformly under every conditioning ego behavior. Without records the
    input comes back unchanged (same objects).
    """
    if not records:
        return list(predictions)
    by_vehicle = {r.vehicle_id: r for r in records}
    out = []
    for pred in predictions:
        record = by_vehicle.get(pred.vehicle_id)
        if record is None:
            out.append(pred)
        else:
            point = {record.direction: 1.0}
            out.append(ConditionalPrediction(
                vehicle_id=pred.vehicle_id,
                table={b: dict(point) for b in EGO_BEHAVIORS}))
    return out


def _finished(record: InterventionRecord, veh: VehicleState) -> bool:
    target = record.source_lane + direction_for_label(record.direction)
    return (veh.lane_index == target
            and abs(veh.lateral_offset) < SETTLED_OFFSET)


def expire(scene: SceneState, records: Sequence[InterventionRecord],
           ) -> list[InterventionRecord]:
    """Drop records whose vehicle left the window or finished its change.

    Pure and idempotent: expiring an already-expired list is a no-op.
    """
    relevant = {v.id: v for v in relevant_vehicles(scene)}
    kept = []
    for record in records:
        veh = relevant.get(record.vehicle_id)
        if veh is None:
            continue
        if _finished(record, veh):
            continue
        kept.append(record)
    return kept
