/** Renderer output: the four information layers and the overlays. */

import { expect, test } from "vitest";
import { COLORS, render } from "../src/renderer";
import { ViewModel } from "../src/viewmodel";
import { fixtureState } from "./fixtures";
import { RecordingDraw } from "./recorder";

const W = 1280;
const H = 720;

function draw(vm: ViewModel, nowMs = 0): string[] {
    const d = new RecordingDraw();
    render(d, vm, W, H, nowMs);
    return d.ops;
}

function connectedVm(state = fixtureState()): ViewModel {
    const vm = new ViewModel();
    vm.connection = "open";
    vm.applyState(state);
    return vm;
}

function count(ops: string[], prefix: string): number {
    return ops.filter((o) => o.startsWith(prefix)).length;
}

test("one frame carries all four information layers", () => {
    const ops = draw(connectedVm());

    // layer 1: pavement, solid edge lines, dashed interior lane marks
    expect(count(ops, `fill ${COLORS.pavement}`)).toBe(1);
    expect(count(ops, `stroke ${COLORS.edgeMark}`)).toBe(2);
    expect(count(ops, `stroke ${COLORS.laneMark}`)).toBeGreaterThan(8);

    // layer 2: ego with the left indicator lit (time 5.0 is a blink-on
    // phase) and the brake bar for planned a = -1.2
    expect(count(ops, `fill ${COLORS.indicator}`)).toBe(2);
    expect(count(ops, `fill ${COLORS.brake}`)).toBe(1);
    expect(count(ops, `fill ${COLORS.ego}`)).toBe(2);

    // layer 3: plan polyline through all 9 samples plus an arrowhead
    const polyline = ops.find((o) => o.startsWith(`stroke ${COLORS.plan}`));
    expect(polyline).toBeDefined();
    expect(polyline!.split("(").length - 1).toBe(9);
    expect(count(ops, `fill ${COLORS.plan}`)).toBe(1);

    // layer 4: red side arrows on the flagged vehicles, red tint on the
    // referenced one (body plus cabin)
    expect(count(ops, `fill ${COLORS.flagArrow}`)).toBe(2);
    expect(count(ops, `text ${COLORS.flagArrow}`)).toBe(2);
    expect(count(ops, `fill ${COLORS.marked}`)).toBe(2);

    expect(ops.join("\n")).toMatchSnapshot();
});

test("indicator lamps go dark in the off phase of the blink", () => {
    const ops = draw(connectedVm(fixtureState({ time: 5.6 })));
    expect(count(ops, `fill ${COLORS.indicator}`)).toBe(0);
});

test("no brake bar when the planned acceleration is mild", () => {
    const state = fixtureState();
    state.ego.a = -0.3;
    const ops = draw(connectedVm(state));
    expect(count(ops, `fill ${COLORS.brake}`)).toBe(0);
});

test("hovering a vehicle draws its outline", () => {
    const vm = connectedVm();
    expect(count(draw(vm), `stroke ${COLORS.hover}`)).toBe(0);
    vm.setPointer(0.5, 0.45);
    const hovered = vm.hoverId();
    expect(hovered).not.toBeNull();
    expect(count(draw(vm), `stroke ${COLORS.hover}`)).toBe(1);
});

test("paused state shows the badge", () => {
    const ops = draw(connectedVm(fixtureState({ paused: true })));
    expect(ops.some((o) => o.includes('"PAUSED"'))).toBe(true);
});

test("toasts render as a banner", () => {
    const vm = connectedVm();
    vm.showToast("AmbiguousDirection: sports1", 100);
    const ops = draw(vm, 200);
    expect(count(ops, `rect ${COLORS.toastBg}`)).toBe(1);
    expect(ops.some((o) => o.includes("AmbiguousDirection"))).toBe(true);
});

test("losing the connection dims the stale frame under an overlay", () => {
    const vm = connectedVm();
    vm.connection = "lost";
    const ops = draw(vm);
    expect(count(ops, `fill ${COLORS.pavement}`)).toBe(1);
    expect(ops[ops.length - 2]).toBe(`rect ${COLORS.overlay} (0.0,0.0) (${W}.0,${H}.0)`);
    expect(ops[ops.length - 1]).toContain('"connection lost"');
});

test("before the first snapshot only the connecting notice shows", () => {
    const vm = new ViewModel();
    const ops = draw(vm);
    expect(ops.length).toBe(3);
    expect(ops[2]).toContain('"connecting..."');
});
