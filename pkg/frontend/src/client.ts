/**
 * WebSocket client for the bridge: sends typed events with sequence numbers
 * and routes incoming frames to callbacks. Reconnects with exponential
 * backoff; the server keeps simulating regardless.
 */

import { parseFrame } from "./protocol";
import type { ClientEvent, Frame, WireAck, WireError, WireState } from "./protocol";

/** Subset of the browser WebSocket the client touches, so tests can swap in
 *  a Node implementation. */
export interface SocketLike {
    send(data: string): void;
    close(): void;
    onopen: ((ev?: unknown) => void) | null;
    onclose: ((ev?: unknown) => void) | null;
    onerror: ((ev?: unknown) => void) | null;
    onmessage: ((ev: { data: unknown }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientCallbacks {
    onState?: (state: WireState) => void;
    onAck?: (ack: WireAck) => void;
    onProtocolError?: (err: WireError) => void;
    onOpen?: () => void;
    onClose?: () => void;
}

function browserSocket(url: string): SocketLike {
    return new WebSocket(url) as unknown as SocketLike;
}

export class SimClient {
    private sock: SocketLike | null = null;
    private seq = 0;
    private closed = false;
    private retries = 0;

    constructor(private url: string,
                private callbacks: ClientCallbacks,
                private factory: SocketFactory = browserSocket) {
        this.connect();
    }

    private connect(): void {
        const sock = this.factory(this.url);
        this.sock = sock;
        sock.onopen = () => {
            this.retries = 0;
            this.callbacks.onOpen?.();
        };
        sock.onclose = () => {
            this.callbacks.onClose?.();
            if (!this.closed) {
                this.reconnect();
            }
        };
        sock.onerror = () => {
            // the close handler does the bookkeeping
        };
        sock.onmessage = (ev) => this.receive(ev.data);
    }

    private reconnect(): void {
        const wait = Math.min(500 * 2 ** this.retries, 8000);
        this.retries += 1;
        setTimeout(() => {
            if (!this.closed) {
                this.connect();
            }
        }, wait);
    }

    private receive(data: unknown): void {
        const text = typeof data === "string" ? data : String(data);
        let frame: Frame;
        try {
            frame = parseFrame(text);
        } catch {
            // a frame the schema rejects is a server bug; surface it
            this.callbacks.onProtocolError?.({ type: "error", message: "unparseable frame" });
            return;
        }
        if (frame.type === "state") {
            this.callbacks.onState?.(frame);
        } else if (frame.type === "ack") {
            this.callbacks.onAck?.(frame);
        } else {
            this.callbacks.onProtocolError?.(frame);
        }
    }

    /** Send one event; returns the sequence number echoed in its ack. */
    send(event: ClientEvent): number {
        this.seq += 1;
        this.sock?.send(JSON.stringify({ ...event, seq: this.seq }));
        return this.seq;
    }

    intervene(u: number, v: number): number {
        return this.send({ type: "intervene", u, v });
    }

    interveneById(vehicleId: string, direction: "left" | "right"): number {
        return this.send({ type: "intervene_by_id", vehicle_id: vehicleId, direction });
    }

    pause(): number {
        return this.send({ type: "pause" });
    }

    resume(): number {
        return this.send({ type: "resume" });
    }

    reset(): number {
        return this.send({ type: "reset" });
    }

    loadScenario(name: string): number {
        return this.send({ type: "load_scenario", name });
    }

    close(): void {
        this.closed = true;
        this.sock?.close();
    }
}
