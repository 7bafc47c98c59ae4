"""Prediction: motifs, conditioning, compositions, and display flags."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foresim.prediction import (BehaviorLabel, ConditionalPrediction,
                                EGO_BEHAVIORS, EgoBehavior,
                                enumerate_compositions, high_probability_flags,
                                predict_scene, predict_vehicle)
from foresim.world import ActiveLaneChange
from util import road, scene, vehicle

K, CL, CR = BehaviorLabel.KEEP, BehaviorLabel.CHANGE_LEFT, BehaviorLabel.CHANGE_RIGHT


def sigma(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def pred(vid: str, dist) -> ConditionalPrediction:
    return ConditionalPrediction(vid, {b: dict(dist) for b in EGO_BEHAVIORS})


# ---------- single-vehicle motifs ----------

def test_no_motif_keeps_lane():
    scn = scene(vehicle("ego", 2, -100.0, 0.0), [vehicle("v", 0, 50.0, 20.0)])
    for behavior in EGO_BEHAVIORS:
        assert predict_vehicle(scn, scn.vehicle("v"), behavior) == {K: 1.0}


def test_merge_motif_value():
    # 50 m left at 20 m/s: trigger 2.5 s -> sigma(3.5 / 1.5)
    rd = road(3, merge=((0, 0.0, 100.0),))
    scn = scene(vehicle("ego", 1, -20.0, 0.0), [vehicle("m", 0, 50.0, 20.0)], rd)
    expected = sigma((6.0 - 2.5) / 1.5)
    for behavior in EGO_BEHAVIORS:
        dist = predict_vehicle(scn, scn.vehicle("m"), behavior)
        assert set(dist) == {K, CL}
        assert dist[CL] == pytest.approx(expected, abs=1e-12)
        assert dist[CL] == pytest.approx(0.9116003, abs=1e-6)
        assert dist[K] == pytest.approx(1.0 - expected, abs=1e-12)


def test_merge_from_leftmost_lane_goes_right():
    rd = road(2, merge=((1, 0.0, 100.0),))
    scn = scene(vehicle("ego", 0, -100.0, 0.0), [vehicle("m", 1, 50.0, 20.0)], rd)
    dist = predict_vehicle(scn, scn.vehicle("m"), EgoBehavior.STRAIGHT)
    assert set(dist) == {K, CR}
    assert dist[CR] == pytest.approx(sigma((6.0 - 2.5) / 1.5), abs=1e-12)


def test_merge_trigger_uses_speed_floor():
    # stationary vehicle: trigger = remaining / max(v, 1) = 50 s
    rd = road(3, merge=((0, 0.0, 100.0),))
    scn = scene(vehicle("ego", 2, -100.0, 0.0), [vehicle("m", 0, 50.0, 0.0)], rd)
    dist = predict_vehicle(scn, scn.vehicle("m"), EgoBehavior.STRAIGHT)
    assert dist[CL] == pytest.approx(sigma((6.0 - 50.0) / 1.5), rel=1e-9)
    assert 0.0 < dist[CL] < 1e-10


def test_overtake_motif_value():
    scn = scene(vehicle("ego", 2, -100.0, 0.0),
                [vehicle("a", 0, 0.0, 25.0), vehicle("lead", 0, 40.0, 20.0)])
    t_trigger = (40.0 - 4.5) / 5.0
    expected = sigma((6.0 - t_trigger) / 1.5)
    dist = predict_vehicle(scn, scn.vehicle("a"), EgoBehavior.STRAIGHT)
    assert set(dist) == {K, CL}
    assert dist[CL] == pytest.approx(expected, abs=1e-12)


def test_overtake_requires_strictly_faster():
    ego = vehicle("ego", 2, -100.0, 0.0)
    same = scene(ego, [vehicle("a", 0, 0.0, 20.0), vehicle("lead", 0, 40.0, 20.0)])
    slower = scene(ego, [vehicle("a", 0, 0.0, 15.0), vehicle("lead", 0, 40.0, 20.0)])
    assert predict_vehicle(same, same.vehicle("a"), EgoBehavior.STRAIGHT) == {K: 1.0}
    assert predict_vehicle(slower, slower.vehicle("a"), EgoBehavior.STRAIGHT) == {K: 1.0}


def test_overtake_needs_a_left_lane():
    scn = scene(vehicle("ego", 0, -100.0, 0.0),
                [vehicle("a", 2, 0.0, 25.0), vehicle("lead", 2, 40.0, 20.0)])
    assert predict_vehicle(scn, scn.vehicle("a"), EgoBehavior.STRAIGHT) == {K: 1.0}


def test_ego_counts_as_overtake_leader():
    scn = scene(vehicle("ego", 1, 30.0, 20.0), [vehicle("a", 1, 0.0, 30.0)])
    gap = (30.0 - 2.25) - 2.25
    expected = sigma((6.0 - gap / 10.0) / 1.5)
    dist = predict_vehicle(scn, scn.vehicle("a"), EgoBehavior.STRAIGHT)
    assert dist[CL] == pytest.approx(expected, abs=1e-12)


def test_merge_takes_precedence_over_overtake():
    rd = road(3, merge=((0, 0.0, 100.0),))
    scn = scene(vehicle("ego", 2, -100.0, 0.0),
                [vehicle("m", 0, 50.0, 20.0), vehicle("lead", 0, 70.0, 10.0)], rd)
    dist = predict_vehicle(scn, scn.vehicle("m"), EgoBehavior.STRAIGHT)
    # the merge trigger (2.5 s), not the overtake trigger, sets the value
    assert dist[CL] == pytest.approx(sigma((6.0 - 2.5) / 1.5), abs=1e-12)


def test_active_change_is_point_mass():
    veh = vehicle("v", 1, 0.0, 20.0, offset=1.5,
                  active=ActiveLaneChange(-1, 1, 0.5))
    scn = scene(vehicle("ego", 2, -100.0, 0.0), [veh])
    for behavior in EGO_BEHAVIORS:
        assert predict_vehicle(scn, veh, behavior) == {CR: 1.0}


# ---------- conditioning on the ego ----------

def test_ego_occupancy_blocks_cut_in():
    # ego rides alongside the predicted slot: only vacating it (LCL/LCR)
    # leaves room for the overtake
    scn = scene(vehicle("ego", 1, 0.0, 30.0),
                [vehicle("a", 0, 0.0, 30.0), vehicle("lead", 0, 30.0, 20.0)])
    a = scn.vehicle("a")
    p_raw = sigma((6.0 - 25.5 / 10.0) / 1.5)
    assert predict_vehicle(scn, a, EgoBehavior.STRAIGHT) == {K: 1.0}
    for behavior in (EgoBehavior.LANE_CHANGE_LEFT, EgoBehavior.LANE_CHANGE_RIGHT):
        dist = predict_vehicle(scn, a, behavior)
        assert dist[CL] == pytest.approx(p_raw, abs=1e-12)
    straight = predict_vehicle(scn, a, EgoBehavior.STRAIGHT).get(CL, 0.0)
    vacated = predict_vehicle(scn, a, EgoBehavior.LANE_CHANGE_LEFT).get(CL, 0.0)
    assert vacated >= straight


def test_traffic_blocker_gates_all_behaviors():
    # a stopped car sits right at the projected target slot; no ego behavior
    # can clear it
    scn = scene(vehicle("ego", 2, -100.0, 0.0),
                [vehicle("a", 0, 0.0, 25.0), vehicle("lead", 0, 30.0, 20.0),
                 vehicle("block", 1, 76.0, 0.0)])
    for behavior in EGO_BEHAVIORS:
        assert predict_vehicle(scn, scn.vehicle("a"), behavior) == {K: 1.0}


def test_rear_margin_blocks_cut_in():
    # the would-be follower is too close behind the projected slot
    scn = scene(vehicle("ego", 2, -100.0, 0.0),
                [vehicle("a", 0, 0.0, 25.0), vehicle("lead", 0, 30.0, 20.0),
                 vehicle("block", 1, 40.0, 10.0)])
    assert predict_vehicle(scn, scn.vehicle("a"), EgoBehavior.STRAIGHT) == {K: 1.0}


# ---------- scene-level prediction ----------

def test_predict_scene_order_and_relevance():
    scn = scene(vehicle("ego", 1, 0.0, 30.0),
                [vehicle("b", 0, 40.0, 20.0), vehicle("a", 2, 60.0, 20.0),
                 vehicle("far", 0, 200.0, 20.0)])
    preds = predict_scene(scn)
    assert [p.vehicle_id for p in preds] == ["a", "b"]
    for p in preds:
        assert set(p.table) == set(EGO_BEHAVIORS)


# ---------- compositions ----------

def test_composition_product_and_order():
    preds = [pred("a", {K: 0.9, CL: 0.1}), pred("b", {K: 0.7, CL: 0.3})]
    comps = enumerate_compositions(preds, EgoBehavior.STRAIGHT, k=8)
    probs = [c.probability for c in comps]
    assert probs == pytest.approx([0.63, 0.27, 0.07, 0.03], abs=1e-12)
    assert comps[0].assignment == (("a", K), ("b", K))
    assert comps[1].assignment == (("a", K), ("b", CL))
    assert comps[2].assignment == (("a", CL), ("b", K))
    assert comps[3].assignment == (("a", CL), ("b", CL))
    assert sum(probs) == pytest.approx(1.0, abs=1e-12)


def test_composition_truncation_renormalizes():
    preds = [pred("a", {K: 0.9, CL: 0.1}), pred("b", {K: 0.7, CL: 0.3})]
    comps = enumerate_compositions(preds, EgoBehavior.STRAIGHT, k=2)
    assert len(comps) == 2
    assert [c.probability for c in comps] == pytest.approx([0.7, 0.3], abs=1e-12)
    assert sum(c.probability for c in comps) == pytest.approx(1.0, abs=1e-12)


def test_composition_tie_prefers_keep():
    comps = enumerate_compositions([pred("a", {K: 0.5, CL: 0.5})],
                                   EgoBehavior.STRAIGHT, k=8)
    assert comps[0].assignment == (("a", K),)
    assert comps[1].assignment == (("a", CL),)


def test_composition_empty_scene():
    comps = enumerate_compositions([], EgoBehavior.LANE_CHANGE_LEFT, k=8)
    assert len(comps) == 1
    assert comps[0].assignment == ()
    assert comps[0].probability == 1.0
    assert comps[0].ego_behavior is EgoBehavior.LANE_CHANGE_LEFT


def test_composition_zero_probability_labels_dropped():
    comps = enumerate_compositions([pred("a", {K: 1.0, CL: 0.0})],
                                   EgoBehavior.STRAIGHT, k=8)
    assert len(comps) == 1
    assert comps[0].label_for("a") is K
    assert comps[0].label_for("missing") is K  # default for unlisted ids


# ---------- display flags ----------

def test_flags_threshold_and_direction():
    preds = [pred("a", {K: 0.09, CL: 0.91}),
             pred("b", {K: 0.51, CL: 0.49}),
             pred("c", {CR: 1.0}),
             pred("d", {K: 0.5, CL: 0.25, CR: 0.25})]
    flags = high_probability_flags(preds, EgoBehavior.STRAIGHT)
    # exactly-at-threshold counts; ties go left; ids stay sorted
    assert flags == [("a", CL), ("c", CR), ("d", CL)]


# ---------- properties ----------

@st.composite
def random_scene(draw):
    lanes = draw(st.integers(2, 4))
    merge = ()
    if draw(st.booleans()):
        merge = ((draw(st.integers(0, lanes - 1)), 0.0, 300.0),)
    rd = road(lanes, merge=merge)
    ego = vehicle("ego", draw(st.integers(0, lanes - 1)),
                  draw(st.floats(0.0, 100.0)), draw(st.floats(0.0, 35.0)))
    count = draw(st.integers(0, 6))
    traffic = [vehicle(f"v{i}", draw(st.integers(0, lanes - 1)),
                       ego.s + draw(st.floats(-40.0, 160.0)),
                       draw(st.floats(0.0, 35.0)))
               for i in range(count)]
    return scene(ego, traffic, rd)


@given(scn=random_scene())
@settings(max_examples=150, deadline=None)
def test_distributions_normalized(scn):
    for p in predict_scene(scn):
        for behavior in EGO_BEHAVIORS:
            dist = p.dist(behavior)
            assert abs(sum(dist.values()) - 1.0) <= 1e-9
            assert all(0.0 <= v <= 1.0 for v in dist.values())


@given(scn=random_scene(), k=st.integers(1, 10))
@settings(max_examples=100, deadline=None)
def test_compositions_normalized(scn, k):
    preds = predict_scene(scn)
    for behavior in EGO_BEHAVIORS:
        comps = enumerate_compositions(preds, behavior, k=k)
        assert 1 <= len(comps) <= k
        assert abs(sum(c.probability for c in comps) - 1.0) <= 1e-9
        probs = [c.probability for c in comps]
        assert probs == sorted(probs, reverse=True)


@given(s=st.floats(0.0, 280.0), v=st.floats(0.0, 35.0))
@settings(max_examples=150, deadline=None)
def test_merge_probability_rises_toward_lane_end(s, v):
    rd = road(3, merge=((0, 0.0, 300.0),))
    ego = vehicle("ego", 2, s - 100.0, 0.0)
    near = scene(ego, [vehicle("m", 0, s + 10.0, v)], rd)
    far = scene(ego, [vehicle("m", 0, s, v)], rd)
    p_near = predict_vehicle(near, near.vehicle("m"), EgoBehavior.STRAIGHT).get(CL, 0.0)
    p_far = predict_vehicle(far, far.vehicle("m"), EgoBehavior.STRAIGHT).get(CL, 0.0)
    assert p_near >= p_far
