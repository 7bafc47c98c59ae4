/** Short confirmation and rejection tones through WebAudio. */

let ctx: AudioContext | null = null;

export function playCue(kind: "confirm" | "reject", muted: boolean): void {
    if (muted || typeof AudioContext === "undefined") {
        return;
    }
    ctx = ctx ?? new AudioContext();
    const osc = ctx.createOscillator();
    const gain = ctx.createGain();
    osc.type = "sine";
    osc.frequency.value = kind === "confirm" ? 880 : 196;
    gain.gain.setValueAtTime(0.12, ctx.currentTime);
    gain.gain.exponentialRampToValueAtTime(1e-4, ctx.currentTime + 0.18);
    osc.connect(gain).connect(ctx.destination);
    osc.start();
    osc.stop(ctx.currentTime + 0.2);
}
