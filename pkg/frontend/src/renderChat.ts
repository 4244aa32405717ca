// Transcript rendering: frames in, DOM out, strictly in seq order. Widget
// payloads render from server data only; the client computes nothing.

import type { ChartPayload, PlanDoc, WireFrame, WorkoutDoc } from "./protocol.js";
import { renderGarden } from "./renderGarden.js";

export interface ChatCallbacks {
  onMarkComplete?: (workoutId: string) => void;
  onDeleteWorkout?: (workoutId: string) => void;
}

function row(doc: Document, className: string, seq: number): HTMLElement {
  const el = doc.createElement("div");
  el.className = `frame-row ${className}`;
  el.dataset.seq = String(seq);
  return el;
}

function renderWorkoutLine(doc: Document, workout: WorkoutDoc,
                           callbacks: ChatCallbacks): HTMLElement {
  const line = doc.createElement("li");
  line.className = `plan-workout status-${workout.status}`;
  line.dataset.workoutId = workout.id;
  const label = doc.createElement("span");
  label.className = "workout-label";
  const start = workout.scheduledStart.replace("T", " ").slice(0, 16);
  label.textContent = `${workout.activity} · ${workout.intensity} · ${start} · ${workout.durationMin} min`;
  line.appendChild(label);
  const status = doc.createElement("span");
  status.className = "workout-status";
  status.textContent = workout.status;
  line.appendChild(status);
  if (workout.status !== "completed" && callbacks.onMarkComplete) {
    const button = doc.createElement("button");
    button.className = "workout-complete";
    button.textContent = "Mark complete";
    button.addEventListener("click", () => callbacks.onMarkComplete?.(workout.id));
    line.appendChild(button);
  }
  if (callbacks.onDeleteWorkout) {
    const button = doc.createElement("button");
    button.className = "workout-delete";
    button.textContent = "Delete";
    button.addEventListener("click", () => callbacks.onDeleteWorkout?.(workout.id));
    line.appendChild(button);
  }
  return line;
}

export function renderPlanCard(plan: PlanDoc, doc: Document,
                               callbacks: ChatCallbacks = {}): HTMLElement {
  const card = doc.createElement("div");
  card.className = "plan-card";
  const heading = doc.createElement("h3");
  heading.textContent = `Week ${plan.weekIndex} · starts ${plan.weekStart}`;
  card.appendChild(heading);
  const list = doc.createElement("ul");
  list.className = "plan-workouts";
  for (const workout of plan.workouts) {
    list.appendChild(renderWorkoutLine(doc, workout, callbacks));
  }
  card.appendChild(list);
  return card;
}

export function renderChart(chart: ChartPayload, doc: Document): HTMLElement {
  const figure = doc.createElement("figure");
  figure.className = "chart-widget";
  const caption = doc.createElement("figcaption");
  caption.textContent = chart.description;
  figure.appendChild(caption);
  const bars = doc.createElement("div");
  bars.className = "chart-bars";
  const peak = Math.max(1, ...chart.buckets.map((b) => b.value));
  for (const bucket of chart.buckets) {
    const bar = doc.createElement("div");
    bar.className = "chart-bar";
    bar.dataset.period = bucket.periodStart;
    bar.dataset.value = String(bucket.value);
    bar.style.height = `${Math.round((bucket.value / peak) * 100)}%`;
    bar.title = `${bucket.periodStart}: ${bucket.value}`;
    bars.appendChild(bar);
  }
  figure.appendChild(bars);
  return figure;
}

function renderFrame(frame: WireFrame, doc: Document, callbacks: ChatCallbacks): HTMLElement {
  switch (frame.type) {
    case "userMessage": {
      const el = row(doc, "user-message", frame.seq);
      el.textContent = String(frame.payload.text ?? "");
      return el;
    }
    case "agentText": {
      const el = row(doc, "agent-message", frame.seq);
      const text = doc.createElement("p");
      text.textContent = String(frame.payload.text ?? "");
      el.appendChild(text);
      if (frame.payload.safetyOutcome && frame.payload.safetyOutcome !== "clean") {
        el.dataset.safety = String(frame.payload.safetyOutcome);
      }
      return el;
    }
    case "toolStatus": {
      const el = row(doc, "tool-status", frame.seq);
      el.textContent = `${String(frame.payload.tool)}: ${String(frame.payload.status)}`;
      if (frame.payload.status === "error") {
        el.classList.add("tool-error");
      }
      return el;
    }
    case "planWidget": {
      const el = row(doc, "plan-widget", frame.seq);
      el.appendChild(renderPlanCard(frame.payload.plan as PlanDoc, doc, callbacks));
      return el;
    }
    case "chartWidget": {
      const el = row(doc, "chart-widget-row", frame.seq);
      el.appendChild(renderChart(frame.payload as unknown as ChartPayload, doc));
      return el;
    }
    case "gardenEvent": {
      const el = row(doc, "garden-event", frame.seq);
      el.appendChild(renderGarden(frame.payload.descriptor, doc));
      return el;
    }
    case "error": {
      const el = row(doc, "error-row", frame.seq);
      el.textContent = `${String(frame.payload.code)}: ${String(frame.payload.message)}`;
      return el;
    }
    case "sessionControl": {
      const el = row(doc, "session-control", frame.seq);
      el.textContent = `session ${String(frame.payload.action)}`;
      return el;
    }
    default: {
      // Forward compatibility: an unknown frame renders as a diagnostic row.
      const el = row(doc, "unknown-frame", (frame as WireFrame).seq ?? 0);
      el.textContent = `unrenderable frame: ${JSON.stringify(frame)}`;
      return el;
    }
  }
}

/** Render the whole transcript; input frames are sorted by seq first. */
export function renderChat(frames: WireFrame[], doc: Document = document,
                           callbacks: ChatCallbacks = {}): HTMLElement {
  const transcript = doc.createElement("div");
  transcript.className = "chat-transcript";
  const ordered = [...frames].sort((a, b) => a.seq - b.seq);
  for (const frame of ordered) {
    transcript.appendChild(renderFrame(frame, doc, callbacks));
  }
  return transcript;
}
