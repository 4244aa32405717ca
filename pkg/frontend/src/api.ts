// REST client for the coaching service. The client never recomputes plan
// math: every mutation returns the server's authoritative document, which is
// what gets rendered.

import type { GardenDescriptor, PlanDoc } from "./protocol.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export interface MarkCompleteResult {
  plan: PlanDoc;
  garden: { grown: number[]; descriptor: GardenDescriptor };
}

export interface NewWorkout {
  activity: string;
  scheduledStart: string;
  durationMin: number;
  intensity?: string;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class BloomApi {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        method,
        headers: {
          Authorization: `Bearer ${this.token}`,
          ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
        },
        body: body !== undefined ? JSON.stringify(body) : undefined,
      });
    } catch (err) {
      throw new ApiError(0, `network failure: ${String(err)}`);
    }
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = await response.json();
        detail = typeof parsed.detail === "string" ? parsed.detail : JSON.stringify(parsed.detail);
      } catch {
        // keep statusText
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getCurrentPlan(): Promise<PlanDoc> {
    return this.request("GET", "/plans/current");
  }

  addWorkout(workout: NewWorkout): Promise<PlanDoc> {
    return this.request("POST", "/plans/current/workouts", workout);
  }

  deleteWorkout(workoutId: string): Promise<PlanDoc> {
    return this.request("DELETE", `/plans/current/workouts/${encodeURIComponent(workoutId)}`);
  }

  markComplete(workoutId: string): Promise<MarkCompleteResult> {
    return this.request("PUT", `/plans/current/workouts/${encodeURIComponent(workoutId)}/complete`);
  }

  getGarden(): Promise<GardenDescriptor> {
    return this.request("GET", "/garden");
  }

  getNotifications(): Promise<unknown[]> {
    return this.request("GET", "/notifications");
  }

  recordScreenVisit(screen: string, durationSec: number): Promise<unknown> {
    return this.request("POST", "/usage/events", {
      kind: "screenVisit",
      screen,
      timestamp: new Date().toISOString(),
      durationSec,
    });
  }
}
