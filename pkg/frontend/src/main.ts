/**
 * Browser shell: wires the WebSocket client, view model and renderer to the
 * page. Configuration comes from the URL query (?host=...&port=...), which
 * defaults to wherever the page was served from.
 */

import { playCue } from "./audio";
import { SimClient } from "./client";
import { render } from "./renderer";
import { ViewModel } from "./viewmodel";

const params = new URLSearchParams(location.search);
const host = params.get("host") ?? (location.hostname || "127.0.0.1");
const port = params.get("port") ?? (location.port || "8700");

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const scenarioSelect = document.getElementById("scenario") as HTMLSelectElement;
const pauseButton = document.getElementById("pause") as HTMLButtonElement;
const resetButton = document.getElementById("reset") as HTMLButtonElement;
const muteButton = document.getElementById("mute") as HTMLButtonElement;

const vm = new ViewModel();
const client = new SimClient(`ws://${host}:${port}/ws`, {
    onState: (state) => {
        vm.applyState(state);
        scenarioSelect.value = state.scenario;
        pauseButton.textContent = state.paused ? "resume" : "pause";
    },
    onAck: (ack) => {
        vm.applyAck(ack, performance.now());
        const cue = vm.takeCue();
        if (cue !== null) {
            playCue(cue, vm.muted);
        }
    },
    onProtocolError: (err) => vm.applyProtocolError(err.message, performance.now()),
    onOpen: () => {
        vm.connection = "open";
    },
    onClose: () => {
        vm.connection = "lost";
    },
});

fetch(`http://${host}:${port}/scenarios`)
    .then((r) => r.json())
    .then((body: { scenarios: string[]; current: string }) => {
        scenarioSelect.replaceChildren();
        for (const name of body.scenarios) {
            const opt = document.createElement("option");
            opt.value = name;
            opt.textContent = name;
            scenarioSelect.appendChild(opt);
        }
        scenarioSelect.value = body.current;
    })
    .catch(() => vm.showToast("scenario list unavailable", performance.now()));

function pointerUV(ev: MouseEvent): [number, number] {
    const rect = canvas.getBoundingClientRect();
    return [(ev.clientX - rect.left) / rect.width, (ev.clientY - rect.top) / rect.height];
}

canvas.addEventListener("mousemove", (ev) => {
    const [u, v] = pointerUV(ev);
    vm.setPointer(u, v);
});
canvas.addEventListener("mouseleave", () => vm.clearPointer());
canvas.addEventListener("click", (ev) => {
    const [u, v] = pointerUV(ev);
    client.intervene(u, v);
});

scenarioSelect.addEventListener("change", () => client.loadScenario(scenarioSelect.value));
pauseButton.addEventListener("click", () => {
    if (vm.state?.paused) {
        client.resume();
    } else {
        client.pause();
    }
});
resetButton.addEventListener("click", () => client.reset());
muteButton.addEventListener("click", () => {
    vm.muted = !vm.muted;
    muteButton.textContent = vm.muted ? "unmute" : "mute";
});
window.addEventListener("keydown", (ev) => {
    if (ev.key === " ") {
        ev.preventDefault();
        pauseButton.click();
    } else if (ev.key === "r") {
        client.reset();
    }
});

function frame(): void {
    render(ctx, vm, canvas.width, canvas.height, performance.now());
    requestAnimationFrame(frame);
}

requestAnimationFrame(frame);
