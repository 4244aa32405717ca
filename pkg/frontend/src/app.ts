// Single-page shell: chat, plan, and garden tabs over one websocket plus REST.

import { BloomApi } from "./api.js";
import { renderChat } from "./renderChat.js";
import { renderGarden } from "./renderGarden.js";
import { PlanTab } from "./renderPlanTab.js";
import { ChatSocket } from "./session.js";

export interface AppConfig {
  httpBase: string;  // e.g. http://localhost:8787
  wsBase: string;    // e.g. ws://localhost:8787
  token: string;
  mode?: string;
}

export function mountApp(root: HTMLElement, config: AppConfig, doc: Document = document): void {
  const api = new BloomApi(config.httpBase, config.token);
  const socket = new ChatSocket(`${config.wsBase}/ws/chat?token=${encodeURIComponent(config.token)}`);

  root.className = "bloom-app";
  const banner = doc.createElement("header");
  banner.className = "mode-banner";
  const tabs = doc.createElement("nav");
  const chatPane = doc.createElement("main");
  chatPane.className = "pane chat-pane";
  const planPane = doc.createElement("main");
  planPane.className = "pane plan-pane";
  planPane.hidden = true;
  const gardenPane = doc.createElement("main");
  gardenPane.className = "pane garden-pane";
  gardenPane.hidden = true;

  const planTab = new PlanTab(api, doc, {
    confirm: (message) => window.confirm(message),
  });
  planPane.appendChild(planTab.root);

  const panes: Record<string, HTMLElement> = {
    chat: chatPane, plan: planPane, garden: gardenPane,
  };
  let activeScreen = "chat";
  let enteredAt = Date.now();
  for (const name of Object.keys(panes)) {
    const button = doc.createElement("button");
    button.textContent = name;
    button.addEventListener("click", () => {
      const seconds = (Date.now() - enteredAt) / 1000;
      void api.recordScreenVisit(activeScreen, seconds).catch(() => undefined);
      activeScreen = name;
      enteredAt = Date.now();
      for (const [paneName, pane] of Object.entries(panes)) {
        pane.hidden = paneName !== name;
      }
      if (name === "plan") void planTab.load();
      if (name === "garden") {
        void api.getGarden().then((descriptor) => {
          gardenPane.replaceChildren(renderGarden(descriptor, doc));
        }).catch(() => {
          gardenPane.replaceChildren(renderGarden(null, doc));
        });
      }
    });
    tabs.appendChild(button);
  }

  const transcriptHost = doc.createElement("div");
  transcriptHost.className = "transcript-host";
  const inputBar = doc.createElement("form");
  const input = doc.createElement("input");
  input.placeholder = "Message Beebo…";
  const send = doc.createElement("button");
  send.type = "submit";
  send.textContent = "Send";
  inputBar.append(input, send);
  inputBar.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (!text || !socket.isOpen) return;
    socket.sendUserMessage(text);
    input.value = "";
  });
  chatPane.append(transcriptHost, inputBar);

  socket.onChange = (view) => {
    banner.textContent = view.mode
      ? `mode: ${view.mode} · ${view.connection}`
      : `no active session · ${view.connection}`;
    send.disabled = view.connection !== "open";
    planTab.setOffline(view.connection !== "open");
    transcriptHost.replaceChildren(renderChat(view.frames, doc, {
      onMarkComplete: (id) => void planTab.markComplete(id),
      onDeleteWorkout: (id) => void planTab.deleteWorkout(id),
    }));
    if (view.connection === "open" && view.sessionId === null) {
      socket.startSession(config.mode ?? "atwill");
    }
  };

  root.append(banner, tabs, chatPane, planPane, gardenPane);
  void planTab.load();
}
