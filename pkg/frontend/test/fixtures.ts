/** Hand-built wire frames for renderer and view-model tests. */

import { StateSchema } from "../src/protocol";
import type { WireState } from "../src/protocol";

const PITCH = (8 * Math.PI) / 180;

/**
 * One mid-maneuver snapshot exercising every render layer: a three-lane road
 * with a merge section, a left lane change announced by the indicator, a
 * braking ego, one flagged vehicle and one referenced (injected) vehicle.
 */
export function fixtureState(overrides: Partial<WireState> = {}): WireState {
    const planY = [3.5, 3.5, 3.5, 4.375, 5.25, 6.125, 7.0, 7.0, 7.0];
    const raw = {
        type: "state",
        tick: 100,
        time: 5.0,
        scenario: "fixture",
        paused: false,
        finished: false,
        ego: {
            id: "ego", s: 100.0, lane: 1, lateral: 0.0, v: 30.0, a: -1.2,
            length: 4.8, width: 1.9, indicator: 1, behavior: "LaneChangeLeft",
        },
        vehicles: [
            {
                id: "van1", kind: "van", lane: 0, s: 150.0, lateral: 0.0,
                v: 24.0, length: 5.5, width: 2.1, flagged: true,
                flag_direction: "left", flag_p: 0.97, selected: false,
                injected: false,
            },
            {
                id: "car2", kind: "car", lane: 2, s: 130.0, lateral: 0.0,
                v: 28.0, length: 4.5, width: 1.8, flagged: true,
                flag_direction: "right", flag_p: 1.0, selected: true,
                injected: true,
            },
            {
                id: "truck9", kind: "truck", lane: 0, s: 210.0, lateral: 0.0,
                v: 22.0, length: 12.0, width: 2.5, flagged: false,
                flag_direction: "", flag_p: 0.0, selected: false,
                injected: false,
            },
        ],
        plan: {
            behavior: "LaneChangeLeft",
            expected_cost: 184.25,
            indicator: 1,
            samples: planY.map((y, k) => [k * 1.0, 100.0 + 30.0 * k, y, 30.0]),
        },
        camera: {
            eye: [88.0, 3.5, 4.0],
            forward: [Math.cos(PITCH), 0.0, -Math.sin(PITCH)],
            up: [Math.sin(PITCH), 0.0, Math.cos(PITCH)],
            hfov_deg: 60.0,
            aspect: 16 / 9,
        },
        road: {
            lane_count: 3,
            lane_width: 3.5,
            merge: [[0, 0.0, 258.0]],
        },
        last_ack: null,
        ...overrides,
    };
    return StateSchema.parse(raw);
}
