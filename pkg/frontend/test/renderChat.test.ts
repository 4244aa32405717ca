import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";

import { renderChat } from "../src/renderChat.js";
import type { WireFrame } from "../src/protocol.js";

const transcript = JSON.parse(
  readFileSync("test/fixtures/transcript.json", "utf-8"),
);
const frames: WireFrame[] = transcript.frames;

describe("renderChat", () => {
  it("renders every frame in seq order", () => {
    const el = renderChat(frames, document);
    const seqs = [...el.querySelectorAll<HTMLElement>(".frame-row")].map(
      (row) => Number(row.dataset.seq),
    );
    expect(seqs.length).toBe(frames.length);
    expect(seqs).toEqual([...seqs].sort((a, b) => a - b));
  });

  it("renders shuffled input in seq order anyway", () => {
    const shuffled = [...frames].reverse();
    const el = renderChat(shuffled, document);
    const seqs = [...el.querySelectorAll<HTMLElement>(".frame-row")].map(
      (row) => Number(row.dataset.seq),
    );
    expect(seqs).toEqual([...seqs].sort((a, b) => a - b));
  });

  it("includes one plan card and one chart from the fixture", () => {
    const el = renderChat(frames, document);
    expect(el.querySelectorAll(".plan-card").length).toBe(1);
    expect(el.querySelectorAll(".chart-widget").length).toBe(1);
    const workouts = [...el.querySelectorAll<HTMLElement>(".plan-workout")];
    expect(workouts.length).toBe(3);
    expect(workouts[0].dataset.workoutId).toBe("w1");
  });

  it("chart bars come straight from the server buckets", () => {
    const el = renderChat(frames, document);
    const chartFrame = frames.find((f) => f.type === "chartWidget")!;
    const buckets = (chartFrame.payload as { buckets: { value: number }[] }).buckets;
    const bars = [...el.querySelectorAll<HTMLElement>(".chart-bar")];
    expect(bars.map((b) => Number(b.dataset.value))).toEqual(buckets.map((b) => b.value));
  });

  it("renders agent text with safety badge only when not clean", () => {
    const el = renderChat(frames, document);
    const agents = [...el.querySelectorAll<HTMLElement>(".agent-message")];
    expect(agents.length).toBe(3);
    expect(agents.every((a) => a.dataset.safety === undefined)).toBe(true);
    const revised = renderChat([{
      type: "agentText", sessionId: "s", seq: 1,
      payload: { text: "softened", safetyOutcome: "revised" },
    }], document);
    expect(revised.querySelector<HTMLElement>(".agent-message")!.dataset.safety).toBe("revised");
  });

  it("renders an error frame as a non-blocking inline row", () => {
    const withError = [...frames, {
      type: "error" as const, sessionId: "s", seq: 99,
      payload: { code: "provider_failure", message: "retriable" },
    }];
    const el = renderChat(withError, document);
    expect(el.querySelectorAll(".error-row").length).toBe(1);
    expect(el.querySelectorAll(".frame-row").length).toBe(frames.length + 1);
  });

  it("renders unknown frame types as diagnostic rows", () => {
    const alien = [{ type: "hologram", sessionId: "s", seq: 1, payload: {} }];
    const el = renderChat(alien as unknown as WireFrame[], document);
    expect(el.querySelector(".unknown-frame")).not.toBeNull();
    expect(el.querySelector(".unknown-frame")!.textContent).toContain("hologram");
  });

  it("mark-complete buttons call back with the workout id", () => {
    const clicked: string[] = [];
    const el = renderChat(frames, document, { onMarkComplete: (id) => clicked.push(id) });
    const button = el.querySelector<HTMLButtonElement>(".workout-complete")!;
    button.click();
    expect(clicked).toEqual(["w1"]);
  });
});
