/**
 * Wire protocol spoken by the simulation bridge.
 *
 * One JSON object per WebSocket text frame. The server pushes a "state"
 * snapshot every tick plus one "ack" per handled client event; "error"
 * frames report protocol violations. All simulation data lives in the state
 * frame: the client renders it and never extrapolates.
 */

import { z } from "zod";

const vec3 = z.tuple([z.number(), z.number(), z.number()]);

export const CameraSchema = z.object({
    eye: vec3,
    forward: vec3,
    up: vec3,
    hfov_deg: z.number(),
    aspect: z.number(),
});

export const EgoSchema = z.object({
    id: z.string(),
    s: z.number(),
    lane: z.number().int(),
    lateral: z.number(),
    v: z.number(),
    a: z.number(),
    length: z.number(),
    width: z.number(),
    indicator: z.number().int(), // 0 off, +1 left, -1 right
    behavior: z.string(),
});

export const VehicleSchema = z.object({
    id: z.string(),
    kind: z.string(),
    lane: z.number().int(),
    s: z.number(),
    lateral: z.number(),
    v: z.number(),
    length: z.number(),
    width: z.number(),
    flagged: z.boolean(),
    flag_direction: z.string(), // "left" | "right" | ""
    flag_p: z.number(),
    selected: z.boolean(),
    injected: z.boolean(),
});

export const PlanSchema = z.object({
    behavior: z.string(),
    expected_cost: z.number(),
    indicator: z.number().int(),
    samples: z.array(z.tuple([z.number(), z.number(), z.number(), z.number()])),
});

export const RoadSchema = z.object({
    lane_count: z.number().int(),
    lane_width: z.number(),
    merge: z.array(z.tuple([z.number(), z.number(), z.number()])),
});

export const AckSchema = z.object({
    type: z.literal("ack"),
    event: z.string(),
    ok: z.boolean(),
    seq: z.number().optional(),
    vehicle_id: z.string().optional(),
    direction: z.string().optional(),
    name: z.string().optional(),
    error: z.string().optional(),
    detail: z.string().optional(),
});

export const StateSchema = z.object({
    type: z.literal("state"),
    tick: z.number().int(),
    time: z.number(),
    scenario: z.string(),
    paused: z.boolean(),
    finished: z.boolean(),
    ego: EgoSchema,
    vehicles: z.array(VehicleSchema),
    plan: PlanSchema,
    camera: CameraSchema,
    road: RoadSchema,
    last_ack: AckSchema.nullable(),
});

export const ErrorSchema = z.object({
    type: z.literal("error"),
    message: z.string(),
});

export const FrameSchema = z.discriminatedUnion("type", [
    StateSchema,
    AckSchema,
    ErrorSchema,
]);

export type WireCamera = z.infer<typeof CameraSchema>;
export type WireEgo = z.infer<typeof EgoSchema>;
export type WireVehicle = z.infer<typeof VehicleSchema>;
export type WirePlan = z.infer<typeof PlanSchema>;
export type WireRoad = z.infer<typeof RoadSchema>;
export type WireAck = z.infer<typeof AckSchema>;
export type WireState = z.infer<typeof StateSchema>;
export type WireError = z.infer<typeof ErrorSchema>;
export type Frame = z.infer<typeof FrameSchema>;

export function parseFrame(text: string): Frame {
    return FrameSchema.parse(JSON.parse(text));
}

export type ClientEvent =
    | { type: "intervene"; u: number; v: number }
    | { type: "intervene_by_id"; vehicle_id: string; direction: "left" | "right" }
    | { type: "pause" }
    | { type: "resume" }
    | { type: "reset" }
    | { type: "load_scenario"; name: string };
