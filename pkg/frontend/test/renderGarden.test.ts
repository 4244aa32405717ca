import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";

import { renderGarden } from "../src/renderGarden.js";
import type { GardenDescriptor } from "../src/protocol.js";

const week3: GardenDescriptor = JSON.parse(
  readFileSync("test/fixtures/garden_week3.json", "utf-8"),
);

describe("renderGarden", () => {
  it("week-3 scene shows the beehive", () => {
    const el = renderGarden(week3, document);
    expect(el.querySelector(".reward-beehive")).not.toBeNull();
    expect(el.querySelector(".reward-birdOnBranch")).not.toBeNull();
    expect(el.querySelector(".reward-birdAndBirdhouse")).toBeNull();
  });

  it("week-3 scene matches its snapshot", () => {
    expect(renderGarden(week3, document).outerHTML).toMatchSnapshot();
  });

  it("identical descriptors render identical trees", () => {
    const copy = JSON.parse(JSON.stringify(week3));
    expect(renderGarden(week3, document).outerHTML)
      .toBe(renderGarden(copy, document).outerHTML);
  });

  it("renders persisted bloom plus growing flower with stages", () => {
    const el = renderGarden(week3, document);
    const flowers = [...el.querySelectorAll<HTMLElement>(".flower")];
    expect(flowers.map((f) => f.dataset.stage)).toEqual(["5", "2"]);
  });

  it("critters carry kind, color, and size classes", () => {
    const el = renderGarden(week3, document);
    const bee = el.querySelector(".critter-bee")!;
    expect(bee.className).toContain("color-bee");
    expect(bee.className).toContain("size-medium");
    const butterfly = el.querySelector(".critter-butterfly")!;
    expect(butterfly.className).toContain("color-orange");
    expect(butterfly.className).toContain("size-large");
  });

  it("empty descriptor renders a single seed flower", () => {
    const empty: GardenDescriptor = {
      weekNumber: 1, frozen: false,
      flowers: [{ slot: 0, stage: 0 }], rewards: [], critters: [],
    };
    const el = renderGarden(empty, document);
    expect([...el.querySelectorAll<HTMLElement>(".flower")].map((f) => f.dataset.stage))
      .toEqual(["0"]);
    expect(el.querySelectorAll(".critter").length).toBe(0);
  });

  it("malformed descriptor falls back to the placeholder scene", () => {
    for (const junk of [null, 42, "garden", { flowers: "nope" }]) {
      const el = renderGarden(junk, document);
      expect(el.classList.contains("garden-placeholder")).toBe(true);
      expect(el.querySelector(".flower.stage-0")).not.toBeNull();
    }
  });
});
