/** End-to-end against a live server: catalog, click, ack, tint, injection. */

import { spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import net from "node:net";
import path from "node:path";
import { fileURLToPath } from "node:url";
import WebSocket from "ws";
import { afterAll, beforeAll, expect, test } from "vitest";
import { project, vehicleTarget } from "../src/camera";
import { SimClient } from "../src/client";
import type { SocketLike } from "../src/client";
import type { WireAck, WireState } from "../src/protocol";
import { COLORS, render } from "../src/renderer";
import { ViewModel } from "../src/viewmodel";
import { RecordingDraw } from "./recorder";

const repoRoot = fileURLToPath(new URL("../..", import.meta.url));

function nodeSocket(url: string): SocketLike {
    return new WebSocket(url) as unknown as SocketLike;
}

function freePort(): Promise<number> {
    return new Promise((resolve, reject) => {
        const srv = net.createServer();
        srv.on("error", reject);
        srv.listen(0, "127.0.0.1", () => {
            const port = (srv.address() as net.AddressInfo).port;
            srv.close((err) => (err ? reject(err) : resolve(port)));
        });
    });
}

async function waitFor<T>(get: () => T | undefined | null | false,
                          what: string, timeoutMs = 10000): Promise<T> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
        const value = get();
        if (value) {
            return value;
        }
        if (Date.now() > deadline) {
            throw new Error(`timed out waiting for ${what}`);
        }
        await new Promise((r) => setTimeout(r, 10));
    }
}

let server: ChildProcess | null = null;
let serverErr = "";
let port = 0;

beforeAll(async () => {
    port = await freePort();
    server = spawn("foresim", [
        "serve",
        "--scenario-dir", path.join(repoRoot, "scenarios"),
        "--scenario", "scenario2",
        "--port", String(port),
        "--rtf", "4",
    ], { cwd: repoRoot, stdio: ["ignore", "ignore", "pipe"] });
    server.stderr!.on("data", (chunk) => {
        serverErr += String(chunk);
    });
    const deadline = Date.now() + 20000;
    for (;;) {
        try {
            const r = await fetch(`http://127.0.0.1:${port}/scenarios`);
            if (r.ok) {
                break;
            }
        } catch {
            // not listening yet
        }
        if (server.exitCode !== null) {
            throw new Error(`server exited: ${serverErr}`);
        }
        if (Date.now() > deadline) {
            throw new Error(`server never came up: ${serverErr}`);
        }
        await new Promise((r) => setTimeout(r, 100));
    }
}, 30000);

afterAll(() => {
    server?.kill();
});

test("the catalog endpoint lists the shipped scenarios", async () => {
    const r = await fetch(`http://127.0.0.1:${port}/scenarios`);
    expect(await r.json()).toEqual({
        scenarios: ["scenario1", "scenario2", "scenario3"],
        current: "scenario2",
    });
});

test("clicking the server-projected sports car injects its cut-in", async () => {
    const vm = new ViewModel();
    const states: WireState[] = [];
    const acks: WireAck[] = [];
    const client = new SimClient(`ws://127.0.0.1:${port}/ws`, {
        onState: (s) => {
            vm.applyState(s);
            states.push(s);
        },
        onAck: (a) => {
            acks.push(a);
        },
        onOpen: () => {
            vm.connection = "open";
        },
        onClose: () => {
            vm.connection = "lost";
        },
    }, nodeSocket);
    try {
        await waitFor(() => states.length > 0, "first snapshot");
        const pauseSeq = client.pause();
        await waitFor(() => acks.find((a) => a.seq === pauseSeq), "pause ack");

        const frozen = states[states.length - 1];
        const target = frozen.vehicles.find((v) => v.id === "sports1");
        expect(target).toBeDefined();
        expect(target!.injected).toBe(false);
        expect(target!.selected).toBe(false);

        // click exactly where the server's own camera puts the sports car
        const screen = project(frozen.camera, vehicleTarget(frozen.road, target!));
        expect(screen).not.toBeNull();
        expect(screen!.u).toBeGreaterThan(0);
        expect(screen!.u).toBeLessThan(1);
        expect(screen!.v).toBeGreaterThan(0);
        expect(screen!.v).toBeLessThan(1);
        const clickSeq = client.intervene(screen!.u, screen!.v);
        const ack = await waitFor(() => acks.find((a) => a.seq === clickSeq), "intervene ack");
        expect(ack.ok).toBe(true);
        expect(ack.event).toBe("intervene");
        expect(ack.vehicle_id).toBe("sports1");
        expect(ack.direction).toBe("ChangeLeft");

        // red tint within one frame: rendering right after the ack marks the
        // car although every snapshot so far predates the selection
        expect(states.every((s) => s.vehicles.every((v) => !v.selected && !v.injected))).toBe(true);
        vm.applyAck(ack, 5000);
        const d = new RecordingDraw();
        render(d, vm, 1280, 720, 5000);
        expect(d.ops.filter((o) => o.startsWith(`fill ${COLORS.marked}`)).length).toBe(2);

        // the injection must show up in the next snapshot
        const before = states.length;
        client.resume();
        await waitFor(() => states.length > before, "post-resume snapshot");
        const after = states[before].vehicles.find((v) => v.id === "sports1");
        expect(after).toBeDefined();
        expect(after!.injected).toBe(true);
        expect(after!.selected).toBe(true);
        expect(after!.flagged).toBe(true);
        expect(after!.flag_direction).toBe("left");
        expect(after!.flag_p).toBe(1.0);
    } finally {
        client.close();
    }
}, 30000);
