"""Motif-based cut-in prediction and scene compositions.

Each relevant vehicle gets a categorical distribution over {Keep, ChangeLeft,
ChangeRight}, conditioned on what the ego itself is about to do (the ego
vacating or occupying a lane changes whether a cut-in gap exists). Per-vehicle
distributions multiply into scene compositions: joint hypotheses the planner
rolls out and weighs by probability.

Two motifs raise the cut-in probability:

* overtake: a vehicle closing on a slower same-lane leader will pull out
  left about when the gap would close; trigger time = gap / (v - v_lead),
* merge: a vehicle on a merge section must leave before the section ends;
  trigger time = remaining distance / max(v, 1).

Both map trigger time to probability through a logistic
``sigma((t0 - t_trigger) / tau)`` and gate on a binary gap factor: the
maneuver is only predicted while the target lane around the vehicle's
projected position is free (IDM spacing margins, ego occupancy included).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

from .scenario import PredictionParams
from .world import SceneState, VehicleState, relevant_vehicles


class BehaviorLabel(Enum):
    """Per-vehicle maneuver hypothesis."""

    KEEP = "Keep"
    CHANGE_LEFT = "ChangeLeft"
    CHANGE_RIGHT = "ChangeRight"


class EgoBehavior(Enum):
    """Ego maneuver the predictions are conditioned on."""

    STRAIGHT = "Straight"
    LANE_CHANGE_LEFT = "LaneChangeLeft"
    LANE_CHANGE_RIGHT = "LaneChangeRight"


_LABEL_ORDER = {BehaviorLabel.KEEP: 0, BehaviorLabel.CHANGE_LEFT: 1,
                BehaviorLabel.CHANGE_RIGHT: 2}

EGO_BEHAVIORS = (EgoBehavior.STRAIGHT, EgoBehavior.LANE_CHANGE_LEFT,
                 EgoBehavior.LANE_CHANGE_RIGHT)


def label_for_direction(direction: int) -> BehaviorLabel:
    return BehaviorLabel.CHANGE_LEFT if direction > 0 else BehaviorLabel.CHANGE_RIGHT


def direction_for_label(label: BehaviorLabel) -> int:
    if label is BehaviorLabel.CHANGE_LEFT:
        return 1
    if label is BehaviorLabel.CHANGE_RIGHT:
        return -1
    raise ValueError(f"{label} has no direction")


@dataclass(frozen=True)
class ConditionalPrediction:
    """Distributions over maneuver labels, one per conditioning ego behavior."""

    vehicle_id: str
    table: Mapping[EgoBehavior, Mapping[BehaviorLabel, float]]

    def dist(self, ego_behavior: EgoBehavior) -> Mapping[BehaviorLabel, float]:
        return self.table[ego_behavior]


@dataclass(frozen=True)
class SceneComposition:
    """One joint maneuver assignment over the relevant vehicles."""

    ego_behavior: EgoBehavior
    assignment: tuple[tuple[str, BehaviorLabel], ...]  # sorted by vehicle id
    probability: float

    def label_for(self, vehicle_id: str) -> BehaviorLabel:
        for vid, label in self.assignment:
            if vid == vehicle_id:
                return label
        return BehaviorLabel.KEEP


def _sigma(x: float) -> float:
    # exp only ever sees non-positive arguments, so huge |x| cannot overflow
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def _ego_projected_lane(ego: VehicleState, ego_behavior: EgoBehavior,
                        lane_count: int) -> int:
    lane = ego.lane_index
    if ego_behavior is EgoBehavior.LANE_CHANGE_LEFT and lane + 1 < lane_count:
        lane += 1
    elif ego_behavior is EgoBehavior.LANE_CHANGE_RIGHT and lane - 1 >= 0:
        lane -= 1
    return lane


def _gap_factor(scene: SceneState, veh: VehicleState, target_lane: int,
                ego_behavior: EgoBehavior, lookahead: float) -> float:
    """1.0 iff the target-lane slot around the projected position is free.

    Everyone is projected ``lookahead`` seconds at constant speed; the ego
    occupies the lane its conditioning behavior puts it in. Margins are IDM
    spacing: s0 + T*v of whichever vehicle would have to follow.
    """
    v_pos = veh.s + veh.v * lookahead
    others: list[tuple[int, float, float, float, float]] = []
    for other in scene.traffic:
        if other.id == veh.id:
            continue
        others.append((other.lane_index, other.s + other.v * lookahead,
                       other.length, other.idm.s0 + other.idm.T * other.v, other.v))
    ego = scene.ego
    ego_lane = _ego_projected_lane(ego, ego_behavior, scene.road.lane_count)
    others.append((ego_lane, ego.s + ego.v * lookahead, ego.length,
                   ego.idm.s0 + ego.idm.T * ego.v, ego.v))

    front_margin = veh.idm.s0 + veh.idm.T * veh.v
    for lane, s_o, length_o, follow_margin, _v in others:
        if lane != target_lane:
            continue
        if s_o >= v_pos:
            gap = (s_o - 0.5 * length_o) - (v_pos + 0.5 * veh.length)
            if gap < front_margin:
                return 0.0
        else:
            gap = (v_pos - 0.5 * veh.length) - (s_o + 0.5 * length_o)
            if gap < follow_margin:
                return 0.0
    return 1.0


def _leader_of(scene: SceneState, veh: VehicleState) -> Optional[VehicleState]:
    best = None
    for other in scene.traffic:
        if other.id == veh.id or other.lane_index != veh.lane_index or other.s < veh.s:
            continue
        if best is None or other.s < best.s:
            best = other
    ego = scene.ego
    if ego.lane_index == veh.lane_index and ego.s >= veh.s:
        if best is None or ego.s < best.s:
            best = ego
    return best


def predict_vehicle(scene: SceneState, vehicle: VehicleState,
                    ego_behavior: EgoBehavior,
                    params: PredictionParams = PredictionParams(),
                    ) -> dict[BehaviorLabel, float]:
    """Maneuver distribution for one vehicle, conditioned on an ego behavior.

    A vehicle already blending between lanes is reported as a point mass on
    its observed direction. Otherwise the merge motif applies on merge
    sections and the overtake motif behind a slower leader; with neither, the
    vehicle keeps its lane with probability one.
    """
    if vehicle.active_change is not None:
        return {label_for_direction(vehicle.active_change.direction): 1.0}

    road = scene.road
    p_raw = 0.0
    target_lane = None

    section = road.merge_section_at(vehicle.lane_index, vehicle.s)
    if section is not None:
        remaining = section[1] - vehicle.s
        t_trigger = remaining / max(vehicle.v, 1.0)
        p_raw = _sigma((params.t0 - t_trigger) / params.tau)
        target_lane = vehicle.lane_index + 1
        if target_lane >= road.lane_count:
            target_lane = vehicle.lane_index - 1
    else:
        leader = _leader_of(scene, vehicle)
        if (leader is not None and vehicle.v > leader.v
                and vehicle.lane_index + 1 < road.lane_count):
            gap = leader.rear() - vehicle.front()
            t_trigger = gap / (vehicle.v - leader.v)
            p_raw = _sigma((params.t0 - t_trigger) / params.tau)
            target_lane = vehicle.lane_index + 1

    if target_lane is None or not 0 <= target_lane < road.lane_count:
        return {BehaviorLabel.KEEP: 1.0}

    g = _gap_factor(scene, vehicle, target_lane, ego_behavior, params.lookahead)
    p = p_raw * g
    if p <= 0.0:
        return {BehaviorLabel.KEEP: 1.0}
    label = BehaviorLabel.CHANGE_LEFT if target_lane > vehicle.lane_index \
        else BehaviorLabel.CHANGE_RIGHT
    return {BehaviorLabel.KEEP: 1.0 - p, label: p}


def predict_scene(scene: SceneState,
                  params: PredictionParams = PredictionParams(),
                  ) -> list[ConditionalPrediction]:
    """Conditional predictions for every relevant vehicle, ordered by id."""
    out = []
    for veh in relevant_vehicles(scene):
        table = {b: predict_vehicle(scene, veh, b, params) for b in EGO_BEHAVIORS}
        out.append(ConditionalPrediction(vehicle_id=veh.id, table=table))
    return out


def enumerate_compositions(predictions: Sequence[ConditionalPrediction],
                           ego_behavior: EgoBehavior,
                           k: int = 8) -> list[SceneComposition]:
    """Joint compositions from independent per-vehicle distributions.

    The Cartesian product over nonzero labels is ranked by probability
    (ties: lexicographic label assignment over id-sorted vehicles), cut to
    the ``k`` most probable, and renormalized to sum exactly one. With no
    relevant vehicles the single empty composition has probability 1.
    """
    preds = sorted(predictions, key=lambda p: p.vehicle_id)
    supports = []
    for pred in preds:
        dist = pred.dist(ego_behavior)
        labels = [(label, prob) for label, prob in
                  sorted(dist.items(), key=lambda kv: _LABEL_ORDER[kv[0]])
                  if prob > 0.0]
        supports.append(labels)

    raw = []
    for combo in itertools.product(*supports):
        prob = 1.0
        for _, p in combo:
            prob *= p
        if prob <= 0.0:
            continue
        assignment = tuple((pred.vehicle_id, label)
                           for pred, (label, _) in zip(preds, combo))
        order_key = tuple(_LABEL_ORDER[label] for _, label in assignment)
        raw.append((prob, order_key, assignment))

    raw.sort(key=lambda item: (-item[0], item[1]))
    kept = raw[:k]
    total = sum(prob for prob, _, _ in kept)
    return [SceneComposition(ego_behavior=ego_behavior, assignment=assignment,
                             probability=prob / total)
            for prob, _, assignment in kept]


def high_probability_flags(predictions: Sequence[ConditionalPrediction],
                           ego_behavior: EgoBehavior,
                           threshold: float = 0.5,
                           ) -> list[tuple[str, BehaviorLabel]]:
    """Vehicles whose total lane-change probability reaches the threshold.

    Returns (vehicle_id, direction) pairs ordered by id; the direction is the
    more probable change side.
    """
    out = []
    for pred in sorted(predictions, key=lambda p: p.vehicle_id):
        dist = pred.dist(ego_behavior)
        p_left = dist.get(BehaviorLabel.CHANGE_LEFT, 0.0)
        p_right = dist.get(BehaviorLabel.CHANGE_RIGHT, 0.0)
        if p_left + p_right >= threshold:
            label = BehaviorLabel.CHANGE_LEFT if p_left >= p_right \
                else BehaviorLabel.CHANGE_RIGHT
            out.append((pred.vehicle_id, label))
    return out
