/**
 * Client-side session state: the latest server snapshot plus the transient
 * interaction state layered on top of it (pointer, ack highlight, toast,
 * audio cue, connection). Everything drawn comes from the server; this class
 * only decides which of it is visible right now.
 */

import { pickVehicle } from "./camera";
import type { WireAck, WireState, WireVehicle } from "./protocol";

// ack tint survives this long without the server confirming the selection
export const HIGHLIGHT_MS = 1500;
export const TOAST_MS = 2600;

export type Connection = "connecting" | "open" | "lost";
export type Cue = "confirm" | "reject";

export class ViewModel {
    state: WireState | null = null;
    connection: Connection = "connecting";
    pointer: { u: number; v: number } | null = null;
    muted = false;
    private highlight: { vehicleId: string; until: number } | null = null;
    private toast: { text: string; until: number } | null = null;
    private cue: Cue | null = null;

    applyState(state: WireState): void {
        this.state = state;
    }

    applyAck(ack: WireAck, nowMs: number): void {
        if (ack.ok && ack.vehicle_id !== undefined) {
            this.highlight = { vehicleId: ack.vehicle_id, until: nowMs + HIGHLIGHT_MS };
            this.cue = "confirm";
        } else if (!ack.ok) {
            const detail = ack.detail ? `: ${ack.detail}` : "";
            this.showToast(`${ack.error ?? "rejected"}${detail}`, nowMs);
            this.cue = "reject";
        }
    }

    applyProtocolError(message: string, nowMs: number): void {
        this.showToast(message, nowMs);
    }

    showToast(text: string, nowMs: number): void {
        this.toast = { text, until: nowMs + TOAST_MS };
    }

    /** One-shot audio flag; the shell consumes it right after each frame. */
    takeCue(): Cue | null {
        const cue = this.cue;
        this.cue = null;
        return cue;
    }

    setPointer(u: number, v: number): void {
        this.pointer = { u, v };
    }

    clearPointer(): void {
        this.pointer = null;
    }

    /**
     * Red-tint predicate. Server marks win; the ack highlight bridges the
     * frames between a successful click and the next snapshot, then decays.
     */
    isMarked(veh: WireVehicle, nowMs: number): boolean {
        if (veh.selected || veh.injected) {
            return true;
        }
        return this.highlight !== null
            && this.highlight.vehicleId === veh.id
            && nowMs < this.highlight.until;
    }

    /** Angular-minimum vehicle under the pointer (hover pre-highlight). */
    hoverId(): string | null {
        if (this.state === null || this.pointer === null) {
            return null;
        }
        const veh = pickVehicle(this.state, this.pointer.u, this.pointer.v);
        return veh === null ? null : veh.id;
    }

    toastText(nowMs: number): string | null {
        return this.toast !== null && nowMs < this.toast.until ? this.toast.text : null;
    }
}
