// Plan tab: the current weekly plan with add / delete / mark-complete
// controls wired to REST with the user-ui actor. Every control re-renders
// from the server's response; failures surface as toasts without losing
// local input; offline disables controls with a reconnect hint.

import { ApiError, BloomApi, NewWorkout } from "./api.js";
import type { PlanDoc } from "./protocol.js";
import { renderPlanCard } from "./renderChat.js";

export interface PlanTabOptions {
  offline?: boolean;
  confirm?: (message: string) => boolean;
  onPlanChanged?: (plan: PlanDoc) => void;
}

export class PlanTab {
  readonly root: HTMLElement;
  private plan: PlanDoc | null = null;
  private toastBox: HTMLElement;
  private body: HTMLElement;

  constructor(
    private api: BloomApi,
    private doc: Document = document,
    private options: PlanTabOptions = {},
  ) {
    this.root = doc.createElement("section");
    this.root.className = "plan-tab";
    this.toastBox = doc.createElement("div");
    this.toastBox.className = "toasts";
    this.body = doc.createElement("div");
    this.body.className = "plan-tab-body";
    this.root.appendChild(this.toastBox);
    this.root.appendChild(this.body);
    this.renderBody();
  }

  get currentPlan(): PlanDoc | null {
    return this.plan;
  }

  async load(): Promise<void> {
    try {
      this.plan = await this.api.getCurrentPlan();
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.plan = null;
      } else {
        this.toast(`Could not load plan: ${(err as Error).message}`);
      }
    }
    this.renderBody();
  }

  setOffline(offline: boolean): void {
    this.options.offline = offline;
    this.renderBody();
  }

  private toast(message: string): void {
    const el = this.doc.createElement("div");
    el.className = "toast";
    el.textContent = message;
    this.toastBox.appendChild(el);
  }

  private async mutate(action: () => Promise<PlanDoc>): Promise<void> {
    try {
      this.plan = await action();
      this.options.onPlanChanged?.(this.plan);
    } catch (err) {
      this.toast((err as Error).message);
    }
    this.renderBody();
  }

  markComplete(workoutId: string): Promise<void> {
    return this.mutate(async () => (await this.api.markComplete(workoutId)).plan);
  }

  deleteWorkout(workoutId: string): Promise<void> {
    const confirmFn = this.options.confirm ?? (() => true);
    if (!confirmFn("Delete this workout?")) {
      return Promise.resolve();
    }
    return this.mutate(() => this.api.deleteWorkout(workoutId));
  }

  addWorkout(workout: NewWorkout): Promise<void> {
    return this.mutate(() => this.api.addWorkout(workout));
  }

  private renderBody(): void {
    this.body.replaceChildren();
    if (this.options.offline) {
      const hint = this.doc.createElement("p");
      hint.className = "offline-hint";
      hint.textContent = "Offline — reconnect to edit your plan.";
      this.body.appendChild(hint);
    }
    if (this.plan === null) {
      const empty = this.doc.createElement("p");
      empty.className = "plan-empty";
      empty.textContent = "No weekly plan yet. Beebo will build one with you during onboarding.";
      this.body.appendChild(empty);
      return;
    }
    const callbacks = this.options.offline ? {} : {
      onMarkComplete: (id: string) => void this.markComplete(id),
      onDeleteWorkout: (id: string) => void this.deleteWorkout(id),
    };
    const card = renderPlanCard(this.plan, this.doc, callbacks);
    if (this.options.offline) {
      card.querySelectorAll("button").forEach((b) => (b.disabled = true));
    }
    this.body.appendChild(card);
    this.body.appendChild(this.renderAddForm());
  }

  private renderAddForm(): HTMLElement {
    const form = this.doc.createElement("form");
    form.className = "add-workout";
    const activity = this.doc.createElement("input");
    activity.name = "activity";
    activity.placeholder = "activity (e.g. walking)";
    const start = this.doc.createElement("input");
    start.name = "scheduledStart";
    start.placeholder = "YYYY-MM-DDTHH:MM";
    const duration = this.doc.createElement("input");
    duration.name = "durationMin";
    duration.placeholder = "minutes";
    const submit = this.doc.createElement("button");
    submit.type = "submit";
    submit.textContent = "Add workout";
    if (this.options.offline) {
      submit.disabled = true;
    }
    form.append(activity, start, duration, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const minutes = Number.parseInt(duration.value, 10);
      if (!activity.value || !start.value || Number.isNaN(minutes)) {
        this.toast("Fill in activity, start time, and minutes.");
        return;
      }
      void this.addWorkout({
        activity: activity.value,
        scheduledStart: start.value,
        durationMin: minutes,
      });
    });
    return form;
  }
}
