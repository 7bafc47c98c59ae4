/**
 * Canvas renderer: four information layers over a chase-camera view.
 *
 *   1. road surface and lane marks,
 *   2. the planned trajectory as an arrow on the pavement,
 *   3. surrounding traffic, with a red side arrow on vehicles the predictor
 *      flags and a red body tint on the one the operator referenced,
 *   4. the ego vehicle with indicator and brake lights.
 *
 * All geometry goes through the server-provided camera; the client adds no
 * physics of its own. Draw2D is the small subset of CanvasRenderingContext2D
 * the renderer touches, so tests can record the calls instead of rasterizing.
 */

import { laneY, project } from "./camera";
import type { Vec3 } from "./camera";
import type { WireCamera, WireEgo, WirePlan, WireRoad, WireState, WireVehicle } from "./protocol";
import type { ViewModel } from "./viewmodel";

export interface Draw2D {
    fillStyle: string | CanvasGradient | CanvasPattern;
    strokeStyle: string | CanvasGradient | CanvasPattern;
    lineWidth: number;
    font: string;
    textAlign: CanvasTextAlign;
    beginPath(): void;
    moveTo(x: number, y: number): void;
    lineTo(x: number, y: number): void;
    closePath(): void;
    fill(): void;
    stroke(): void;
    fillRect(x: number, y: number, w: number, h: number): void;
    fillText(text: string, x: number, y: number): void;
}

export const COLORS = {
    background: "#10131a",
    pavement: "#2b2e33",
    laneMark: "#c9c9bf",
    edgeMark: "#f1f1e8",
    mergeZone: "rgba(226,183,66,0.28)",
    ego: "#3c78c8",
    egoTrim: "#d7e6f7",
    marked: "#e02424",
    flagArrow: "#ff2d2d",
    plan: "#3bd46d",
    indicator: "#ffb300",
    brake: "#ff3b30",
    hover: "#ffffff",
    hud: "#e8e8e8",
    toastBg: "rgba(150,28,28,0.92)",
    toastText: "#ffffff",
    overlay: "rgba(8,9,12,0.78)",
} as const;

export const KIND_COLORS: Record<string, string> = {
    car: "#8d969f",
    van: "#77828c",
    truck: "#5f6d79",
    sports_car: "#c79a2e",
};

export const BRAKE_LIGHT_THRESHOLD = -0.5; // m/s^2, planned accel below lights the bar
const VIEW_DEPTH = 220; // m of road drawn ahead of the camera
const NEAR_GROUND = 1.5; // m ahead of the eye where the pavement starts
const DASH_PERIOD = 14; // m, lane marks repeat every this
const DASH_LENGTH = 4; // m painted per period

type Px = readonly [number, number];
type Projector = (p: Vec3) => Px | null;

/** Indicator lamps run a fixed blink from simulation time, so replays and
 *  snapshots are deterministic. */
export function blinkOn(simTime: number): boolean {
    return simTime % 1.0 < 0.55;
}

function projector(camera: WireCamera, width: number, height: number): Projector {
    return (p) => {
        const s = project(camera, p);
        return s === null ? null : [s.u * width, s.v * height];
    };
}

function tracePath(d: Draw2D, pts: ReadonlyArray<Px | null>, close: boolean): boolean {
    if (pts.length < 2 || pts.some((p) => p === null)) {
        return false;
    }
    d.beginPath();
    pts.forEach((p, i) => {
        if (i === 0) {
            d.moveTo(p![0], p![1]);
        } else {
            d.lineTo(p![0], p![1]);
        }
    });
    if (close) {
        d.closePath();
    }
    return true;
}

function fillPoly(d: Draw2D, pts: ReadonlyArray<Px | null>, style: string): void {
    if (tracePath(d, pts, true)) {
        d.fillStyle = style;
        d.fill();
    }
}

function strokePath(d: Draw2D, pts: ReadonlyArray<Px | null>, style: string,
                    width: number, close = false): void {
    if (tracePath(d, pts, close)) {
        d.strokeStyle = style;
        d.lineWidth = width;
        d.stroke();
    }
}

function drawRoad(d: Draw2D, P: Projector, road: WireRoad, eyeX: number): void {
    const sNear = eyeX + NEAR_GROUND;
    const sFar = eyeX + VIEW_DEPTH;
    const yLo = -0.5 * road.lane_width;
    const yHi = (road.lane_count - 0.5) * road.lane_width;
    fillPoly(d, [P([sNear, yLo, 0]), P([sFar, yLo, 0]),
                 P([sFar, yHi, 0]), P([sNear, yHi, 0])], COLORS.pavement);

    for (const [lane, s0, s1] of road.merge) {
        const a = Math.max(s0, sNear);
        const b = Math.min(s1, sFar);
        if (a >= b) {
            continue;
        }
        const lo = (lane - 0.5) * road.lane_width;
        const hi = (lane + 0.5) * road.lane_width;
        fillPoly(d, [P([a, lo, 0]), P([b, lo, 0]),
                     P([b, hi, 0]), P([a, hi, 0])], COLORS.mergeZone);
    }

    for (let k = 0; k <= road.lane_count; k++) {
        const y = (k - 0.5) * road.lane_width;
        if (k === 0 || k === road.lane_count) {
            strokePath(d, [P([sNear, y, 0]), P([sFar, y, 0])], COLORS.edgeMark, 2);
        } else {
            // dashes live in world space so they foreshorten with distance
            for (let s = Math.floor(sNear / DASH_PERIOD) * DASH_PERIOD; s < sFar; s += DASH_PERIOD) {
                const a = Math.max(s, sNear);
                const b = Math.min(s + DASH_LENGTH, sFar);
                if (a < b) {
                    strokePath(d, [P([a, y, 0]), P([b, y, 0])], COLORS.laneMark, 1.5);
                }
            }
        }
    }
}

function drawPlan(d: Draw2D, P: Projector, plan: WirePlan): void {
    const pts = plan.samples
        .map(([, s, y]) => P([s, y, 0.15]))
        .filter((p): p is Px => p !== null);
    if (pts.length < 2) {
        return;
    }
    strokePath(d, pts, COLORS.plan, 3);
    const [x1, y1] = pts[pts.length - 2];
    const [x2, y2] = pts[pts.length - 1];
    const len = Math.hypot(x2 - x1, y2 - y1);
    if (len < 1e-6) {
        return;
    }
    const ux = (x2 - x1) / len;
    const uy = (y2 - y1) / len;
    const size = 10;
    fillPoly(d, [[x2 + ux * size, y2 + uy * size],
                 [x2 - uy * size * 0.6, y2 + ux * size * 0.6],
                 [x2 + uy * size * 0.6, y2 - ux * size * 0.6]], COLORS.plan);
}

function drawBody(d: Draw2D, P: Projector, s: number, y: number,
                  length: number, width: number, fill: string, trim: string): void {
    const corners: Vec3[] = [
        [s - 0.5 * length, y - 0.5 * width, 0],
        [s + 0.5 * length, y - 0.5 * width, 0],
        [s + 0.5 * length, y + 0.5 * width, 0],
        [s - 0.5 * length, y + 0.5 * width, 0],
    ];
    const quad = corners.map(P);
    fillPoly(d, quad, fill);
    strokePath(d, quad, trim, 1.2, true);
    // raised cabin as a cheap depth cue
    fillPoly(d, [
        P([s - 0.25 * length, y - 0.35 * width, 1.1]),
        P([s + 0.25 * length, y - 0.35 * width, 1.1]),
        P([s + 0.25 * length, y + 0.35 * width, 1.1]),
        P([s - 0.25 * length, y + 0.35 * width, 1.1]),
    ], fill);
}

function drawFlagArrow(d: Draw2D, P: Projector, road: WireRoad, veh: WireVehicle): void {
    const dir = veh.flag_direction === "left" ? 1 : -1;
    const y = laneY(road, veh.lane, veh.lateral);
    const yBase = y + dir * (0.5 * veh.width + 0.4);
    const z = 0.9;
    strokePath(d, [P([veh.s, yBase, z]), P([veh.s, yBase + dir * 0.9, z])],
               COLORS.flagArrow, 3);
    fillPoly(d, [P([veh.s, yBase + dir * 1.8, z]),
                 P([veh.s - 0.7, yBase + dir * 0.8, z]),
                 P([veh.s + 0.7, yBase + dir * 0.8, z])], COLORS.flagArrow);
    const label = P([veh.s, y, 2.4]);
    if (label !== null) {
        d.fillStyle = COLORS.flagArrow;
        d.textAlign = "center";
        d.font = "12px system-ui, sans-serif";
        d.fillText(`${Math.round(veh.flag_p * 100)}%`, label[0], label[1]);
    }
}

function drawTraffic(d: Draw2D, P: Projector, road: WireRoad,
                     vehicles: readonly WireVehicle[], vm: ViewModel,
                     hoverId: string | null, nowMs: number): void {
    const ordered = [...vehicles].sort((a, b) => b.s - a.s); // far first
    for (const veh of ordered) {
        const marked = vm.isMarked(veh, nowMs);
        const fill = marked ? COLORS.marked : (KIND_COLORS[veh.kind] ?? KIND_COLORS.car);
        const y = laneY(road, veh.lane, veh.lateral);
        drawBody(d, P, veh.s, y, veh.length, veh.width, fill, COLORS.background);
        if (veh.id === hoverId) {
            const grow = 0.35;
            strokePath(d, [
                P([veh.s - 0.5 * veh.length - grow, y - 0.5 * veh.width - grow, 0]),
                P([veh.s + 0.5 * veh.length + grow, y - 0.5 * veh.width - grow, 0]),
                P([veh.s + 0.5 * veh.length + grow, y + 0.5 * veh.width + grow, 0]),
                P([veh.s - 0.5 * veh.length - grow, y + 0.5 * veh.width + grow, 0]),
            ], COLORS.hover, 2, true);
        }
        if (veh.flagged && veh.flag_direction !== "") {
            drawFlagArrow(d, P, road, veh);
        }
    }
}

function drawEgo(d: Draw2D, P: Projector, road: WireRoad, ego: WireEgo,
                 simTime: number): void {
    const y = laneY(road, ego.lane, ego.lateral);
    drawBody(d, P, ego.s, y, ego.length, ego.width, COLORS.ego, COLORS.egoTrim);
    if (ego.a < BRAKE_LIGHT_THRESHOLD) {
        const rear = ego.s - 0.5 * ego.length;
        fillPoly(d, [P([rear, y - 0.45 * ego.width, 0.35]),
                     P([rear, y + 0.45 * ego.width, 0.35]),
                     P([rear, y + 0.45 * ego.width, 0.75]),
                     P([rear, y - 0.45 * ego.width, 0.75])], COLORS.brake);
    }
    if (ego.indicator !== 0 && blinkOn(simTime)) {
        const side = y + ego.indicator * 0.5 * ego.width;
        for (const sx of [ego.s - 0.5 * ego.length, ego.s + 0.5 * ego.length]) {
            fillPoly(d, [P([sx - 0.35, side, 0.55]), P([sx + 0.35, side, 0.55]),
                         P([sx + 0.35, side, 0.95]), P([sx - 0.35, side, 0.95])],
                     COLORS.indicator);
        }
    }
}

function drawHud(d: Draw2D, vm: ViewModel, state: WireState,
                 width: number, height: number, nowMs: number): void {
    d.font = "14px system-ui, sans-serif";
    d.textAlign = "left";
    d.fillStyle = COLORS.hud;
    const kmh = (state.ego.v * 3.6).toFixed(0);
    d.fillText(`${state.scenario}  t=${state.time.toFixed(1)}s  ${kmh} km/h  ${state.plan.behavior}`, 12, 22);
    if (state.paused || state.finished) {
        d.textAlign = "center";
        d.fillText(state.finished ? "FINISHED" : "PAUSED", width / 2, 22);
    }
    const toast = vm.toastText(nowMs);
    if (toast !== null) {
        const w = Math.min(0.8 * width, 26 + toast.length * 7.5);
        d.fillStyle = COLORS.toastBg;
        d.fillRect((width - w) / 2, height - 64, w, 32);
        d.fillStyle = COLORS.toastText;
        d.textAlign = "center";
        d.font = "14px system-ui, sans-serif";
        d.fillText(toast, width / 2, height - 43);
    }
}

/** Draw one full frame of the view model. */
export function render(d: Draw2D, vm: ViewModel, width: number, height: number,
                       nowMs: number): void {
    d.fillStyle = COLORS.background;
    d.fillRect(0, 0, width, height);
    const state = vm.state;
    if (state !== null) {
        const P = projector(state.camera, width, height);
        drawRoad(d, P, state.road, state.camera.eye[0]);
        drawPlan(d, P, state.plan);
        drawTraffic(d, P, state.road, state.vehicles, vm, vm.hoverId(), nowMs);
        drawEgo(d, P, state.road, state.ego, state.time);
        drawHud(d, vm, state, width, height, nowMs);
    }
    if (vm.connection !== "open") {
        d.fillStyle = COLORS.overlay;
        d.fillRect(0, 0, width, height);
        d.fillStyle = COLORS.hud;
        d.textAlign = "center";
        d.font = "20px system-ui, sans-serif";
        d.fillText(vm.connection === "connecting" ? "connecting..." : "connection lost",
                   width / 2, height / 2);
    }
}
