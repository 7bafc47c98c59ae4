/**
 * Pinhole chase-camera math, kept formula-identical to the server.
 *
 * The camera itself arrives in every state frame; the client re-implements
 * only the projection so it can draw the scene and compute the hover
 * pre-highlight. Screen coordinates are normalized to [0,1]^2 with the
 * origin at the top left, u growing rightward and v downward.
 */

import type { WireCamera, WireRoad, WireState, WireVehicle } from "./protocol";

export type Vec3 = readonly [number, number, number];

// vehicle reference point above the road, same height the server aims at
export const TARGET_HEIGHT = 0.75;
const MIN_TARGET_DISTANCE = 0.1; // m, closer targets have no defined bearing
const MIN_DEPTH = 0.4; // m, points closer to the image plane are culled

export function sub(a: Vec3, b: Vec3): Vec3 {
    return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function dot(a: Vec3, b: Vec3): number {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function cross(a: Vec3, b: Vec3): Vec3 {
    return [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
}

export function norm(a: Vec3): Vec3 {
    const n = Math.hypot(a[0], a[1], a[2]);
    return [a[0] / n, a[1] / n, a[2] / n];
}

function halfTangents(camera: WireCamera): [number, number] {
    const tanH = Math.tan(((camera.hfov_deg * Math.PI) / 180) / 2);
    return [tanH, tanH / camera.aspect];
}

export interface ScreenPoint {
    u: number;
    v: number;
    depth: number;
}

/** Forward projection; null for points at or behind the image plane. */
export function project(camera: WireCamera, point: Vec3): ScreenPoint | null {
    const w = sub(point, camera.eye);
    const right = cross(camera.forward, camera.up);
    const depth = dot(w, camera.forward);
    if (depth < MIN_DEPTH) {
        return null;
    }
    const [tanH, tanV] = halfTangents(camera);
    return {
        u: 0.5 * (dot(w, right) / (depth * tanH) + 1),
        v: 0.5 * (1 - dot(w, camera.up) / (depth * tanV)),
        depth,
    };
}

export interface Ray {
    origin: Vec3;
    direction: Vec3;
}

/** Inverse of `project` for a normalized screen point. */
export function screenToRay(camera: WireCamera, u: number, v: number): Ray {
    const [tanH, tanV] = halfTangents(camera);
    const x = (2 * u - 1) * tanH;
    const y = (1 - 2 * v) * tanV;
    const f = camera.forward;
    const up = camera.up;
    const right = cross(f, up);
    const d: Vec3 = [
        f[0] + x * right[0] + y * up[0],
        f[1] + x * right[1] + y * up[1],
        f[2] + x * right[2] + y * up[2],
    ];
    return { origin: camera.eye, direction: norm(d) };
}

/**
 * Sine of the angle between the ray and origin->point. Scale free, so a far
 * vehicle near the line of sight wins against a near one that is angularly
 * further away. Null for points behind the origin (over a quarter turn off)
 * or sitting on it.
 */
export function normalizedBearing(ray: Ray, point: Vec3): number | null {
    const w = sub(point, ray.origin);
    const len = Math.hypot(w[0], w[1], w[2]);
    if (len < MIN_TARGET_DISTANCE) {
        return null;
    }
    if (dot(ray.direction, w) < 0) {
        return null;
    }
    const c = cross(ray.direction, w);
    return Math.hypot(c[0], c[1], c[2]) / len;
}

/** Continuous lateral position of a lane slot (m, 0 at lane-0 center). */
export function laneY(road: WireRoad, lane: number, lateral: number): number {
    return lane * road.lane_width + lateral;
}

/** The point the server measures bearings against. */
export function vehicleTarget(road: WireRoad, veh: { s: number; lane: number; lateral: number }): Vec3 {
    return [veh.s, laneY(road, veh.lane, veh.lateral), TARGET_HEIGHT];
}

/**
 * Client-side mirror of the server's gaze pick, used only for the hover
 * pre-highlight: minimal bearing, ties to smaller ego distance then id.
 * The authoritative selection always happens server-side.
 */
export function pickVehicle(state: WireState, u: number, v: number): WireVehicle | null {
    if (u < 0 || u > 1 || v < 0 || v > 1) {
        return null;
    }
    const ray = screenToRay(state.camera, u, v);
    const egoY = laneY(state.road, state.ego.lane, state.ego.lateral);
    let best: WireVehicle | null = null;
    let bestKey: [number, number, string] | null = null;
    for (const veh of state.vehicles) {
        const e = normalizedBearing(ray, vehicleTarget(state.road, veh));
        if (e === null) {
            continue;
        }
        const dy = laneY(state.road, veh.lane, veh.lateral) - egoY;
        const key: [number, number, string] = [e, Math.hypot(veh.s - state.ego.s, dy), veh.id];
        if (bestKey === null
            || key[0] < bestKey[0]
            || (key[0] === bestKey[0] && key[1] < bestKey[1])
            || (key[0] === bestKey[0] && key[1] === bestKey[1] && key[2] < bestKey[2])) {
            best = veh;
            bestKey = key;
        }
    }
    return best;
}
