import { beforeEach, describe, expect, it } from "vitest";

import { BloomApi } from "../src/api.js";
import { PlanTab } from "../src/renderPlanTab.js";
import type { PlanDoc, WorkoutDoc } from "../src/protocol.js";

/**
 * Scripted server fixture: holds a plan document and answers the REST
 * surface the way the real service does (mutations return the updated
 * authoritative document; the client computes nothing itself).
 */
class FixtureServer {
  requests: { method: string; path: string }[] = [];
  failNext = false;

  constructor(public plan: PlanDoc) {}

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  fetch = async (input: string, init?: RequestInit): Promise<Response> => {
    const url = new URL(input);
    const method = init?.method ?? "GET";
    this.requests.push({ method, path: url.pathname });
    if (this.failNext) {
      this.failNext = false;
      return this.json(409, { detail: "scripted conflict" });
    }
    if (method === "GET" && url.pathname === "/plans/current") {
      return this.json(200, this.plan);
    }
    const completeMatch = url.pathname.match(/^\/plans\/current\/workouts\/(.+)\/complete$/);
    if (method === "PUT" && completeMatch) {
      const workout = this.plan.workouts.find((w) => w.id === completeMatch[1]);
      if (!workout) return this.json(404, { detail: "not found" });
      workout.status = "completed";
      workout.completionSource = "manual";
      return this.json(200, {
        plan: this.plan,
        garden: { grown: [1], descriptor: { weekNumber: 1, frozen: false, flowers: [], rewards: [], critters: [] } },
      });
    }
    const deleteMatch = url.pathname.match(/^\/plans\/current\/workouts\/([^/]+)$/);
    if (method === "DELETE" && deleteMatch) {
      this.plan.workouts = this.plan.workouts.filter((w) => w.id !== deleteMatch[1]);
      return this.json(200, this.plan);
    }
    if (method === "POST" && url.pathname === "/plans/current/workouts") {
      const body = JSON.parse(String(init?.body)) as Partial<WorkoutDoc>;
      this.plan.workouts.push({
        id: `w${this.plan.workouts.length + 1}`,
        activity: body.activity ?? "walking",
        intensity: body.intensity ?? "moderate",
        scheduledStart: body.scheduledStart ?? "2025-05-05T08:00:00",
        durationMin: body.durationMin ?? 30,
        status: "upcoming",
        completionSource: "none",
        linkedRecordId: null,
      });
      return this.json(200, this.plan);
    }
    return this.json(404, { detail: `no route ${method} ${url.pathname}` });
  };
}

function fixturePlan(): PlanDoc {
  return {
    weekIndex: 1,
    weekStart: "2025-05-05",
    workouts: [
      { id: "w1", activity: "walking", intensity: "moderate",
        scheduledStart: "2025-05-05T08:00:00", durationMin: 30,
        status: "upcoming", completionSource: "none", linkedRecordId: null },
      { id: "w2", activity: "yoga", intensity: "light",
        scheduledStart: "2025-05-07T18:00:00", durationMin: 20,
        status: "upcoming", completionSource: "none", linkedRecordId: null },
    ],
    editLog: [],
  };
}

describe("PlanTab", () => {
  let server: FixtureServer;
  let tab: PlanTab;

  beforeEach(async () => {
    server = new FixtureServer(fixturePlan());
    const api = new BloomApi("http://fixture", "tok", server.fetch);
    tab = new PlanTab(api, document, { confirm: () => true });
    await tab.load();
  });

  it("renders the loaded plan", () => {
    expect(tab.root.querySelectorAll(".plan-workout").length).toBe(2);
    expect(server.requests.at(-1)).toEqual({ method: "GET", path: "/plans/current" });
  });

  it("mark-complete tap round-trips through REST and reflects server state", async () => {
    const button = tab.root.querySelector<HTMLButtonElement>(
      '[data-workout-id="w1"] .workout-complete')!;
    button.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(server.requests.at(-1)).toEqual({
      method: "PUT", path: "/plans/current/workouts/w1/complete",
    });
    const row = tab.root.querySelector('[data-workout-id="w1"]')!;
    expect(row.className).toContain("status-completed");
    // The completed row no longer offers a complete button.
    expect(row.querySelector(".workout-complete")).toBeNull();
    expect(tab.currentPlan?.workouts[0].completionSource).toBe("manual");
  });

  it("delete asks for confirmation then issues DELETE", async () => {
    let asked = 0;
    const api = new BloomApi("http://fixture", "tok", server.fetch);
    const confirmingTab = new PlanTab(api, document, {
      confirm: () => { asked += 1; return true; },
    });
    await confirmingTab.load();
    confirmingTab.root.querySelector<HTMLButtonElement>(
      '[data-workout-id="w2"] .workout-delete')!.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(asked).toBe(1);
    expect(server.requests.at(-1)).toEqual({
      method: "DELETE", path: "/plans/current/workouts/w2",
    });
    expect(confirmingTab.root.querySelectorAll(".plan-workout").length).toBe(1);
  });

  it("declined confirmation sends nothing", async () => {
    const api = new BloomApi("http://fixture", "tok", server.fetch);
    const cautious = new PlanTab(api, document, { confirm: () => false });
    await cautious.load();
    const before = server.requests.length;
    await cautious.deleteWorkout("w2");
    expect(server.requests.length).toBe(before);
  });

  it("REST failure surfaces as a toast and keeps the plan", async () => {
    server.failNext = true;
    await tab.markComplete("w1");
    expect(tab.root.querySelector(".toast")!.textContent).toContain("conflict");
    expect(tab.root.querySelector('[data-workout-id="w1"]')!.className)
      .toContain("status-upcoming");
  });

  it("add form posts a workout and re-renders from the response", async () => {
    const form = tab.root.querySelector<HTMLFormElement>(".add-workout")!;
    const [activity, start, minutes] = [...form.querySelectorAll("input")];
    activity.value = "stretching";
    start.value = "2025-05-09T07:00";
    minutes.value = "10";
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(server.requests.at(-1)).toEqual({ method: "POST", path: "/plans/current/workouts" });
    expect(tab.root.querySelectorAll(".plan-workout").length).toBe(3);
  });

  it("offline disables controls with a reconnect hint", () => {
    tab.setOffline(true);
    expect(tab.root.querySelector(".offline-hint")!.textContent).toContain("reconnect");
    const buttons = [...tab.root.querySelectorAll("button")];
    expect(buttons.length).toBeGreaterThan(0);
    expect(buttons.every((b) => b.disabled)).toBe(true);
  });

  it("404 plan renders the empty state", async () => {
    const emptyServer = new FixtureServer(fixturePlan());
    emptyServer.fetch = async () =>
      new Response(JSON.stringify({ detail: "no current plan" }), { status: 404 });
    const api = new BloomApi("http://fixture", "tok", emptyServer.fetch);
    const emptyTab = new PlanTab(api, document);
    await emptyTab.load();
    expect(emptyTab.root.querySelector(".plan-empty")).not.toBeNull();
  });
});
