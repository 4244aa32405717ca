// Garden scene rendering: a pure function of the descriptor, so identical
// descriptors produce identical DOM trees (snapshot-friendly).

import type { GardenDescriptor } from "./protocol.js";

const REWARD_GLYPHS: Record<string, string> = {
  birdOnBranch: "bird on a branch",
  beehive: "beehive",
  birdAndBirdhouse: "bird and birdhouse",
};

function isDescriptor(value: unknown): value is GardenDescriptor {
  if (typeof value !== "object" || value === null) return false;
  const d = value as Record<string, unknown>;
  return Array.isArray(d.flowers) && Array.isArray(d.rewards) && Array.isArray(d.critters);
}

export function renderGarden(descriptor: unknown, doc: Document = document): HTMLElement {
  const scene = doc.createElement("section");
  scene.className = "garden-scene";

  if (!isDescriptor(descriptor)) {
    // Never blank the ambient display: fall back to an empty starter garden.
    scene.classList.add("garden-placeholder");
    const flower = doc.createElement("div");
    flower.className = "flower stage-0";
    flower.dataset.stage = "0";
    scene.appendChild(flower);
    const note = doc.createElement("p");
    note.className = "garden-note";
    note.textContent = "Garden is growing in…";
    scene.appendChild(note);
    return scene;
  }

  scene.dataset.week = String(descriptor.weekNumber);
  if (descriptor.frozen) {
    scene.dataset.frozen = "true";
  }

  const rewards = doc.createElement("div");
  rewards.className = "garden-rewards";
  for (const reward of descriptor.rewards) {
    const el = doc.createElement("span");
    el.className = `reward reward-${reward}`;
    el.title = REWARD_GLYPHS[reward] ?? reward;
    el.textContent = REWARD_GLYPHS[reward] ?? reward;
    rewards.appendChild(el);
  }
  scene.appendChild(rewards);

  const critters = doc.createElement("div");
  critters.className = "garden-critters";
  for (const critter of descriptor.critters) {
    const el = doc.createElement("span");
    el.className = `critter critter-${critter.kind} color-${critter.color} size-${critter.size}`;
    el.dataset.workout = critter.workoutId;
    el.title = `${critter.size} ${critter.color} ${critter.kind}`;
    critters.appendChild(el);
  }
  scene.appendChild(critters);

  const bed = doc.createElement("div");
  bed.className = "garden-flowers";
  for (const flower of descriptor.flowers) {
    const el = doc.createElement("div");
    el.className = `flower stage-${flower.stage}`;
    el.dataset.slot = String(flower.slot);
    el.dataset.stage = String(flower.stage);
    bed.appendChild(el);
  }
  scene.appendChild(bed);

  return scene;
}
