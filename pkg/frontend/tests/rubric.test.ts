import { describe, expect, it } from "vitest";

import {
  DEFAULT_DESCRIPTIONS,
  RUBRIC_CATEGORIES,
  RubricForm,
  loadDescriptions,
} from "../src/rubric.js";

describe("RubricForm", () => {
  it("blocks submission until all five categories are scored", () => {
    const form = new RubricForm();
    expect(form.complete).toBe(false);
    for (const category of RUBRIC_CATEGORIES.slice(0, 4)) {
      form.setScore(category, 3);
    }
    expect(form.complete).toBe(false);
    expect(form.missing).toEqual(["contribution"]);
    form.setScore("contribution", 5);
    expect(form.complete).toBe(true);
    expect(form.missing).toEqual([]);
  });

  it("rejects out-of-range scores", () => {
    const form = new RubricForm();
    expect(() => form.setScore("clarity", 0)).toThrow();
    expect(() => form.setScore("clarity", 6)).toThrow();
    expect(() => form.setScore("clarity", 2.5)).toThrow();
  });

  it("payload carries every category", () => {
    const form = new RubricForm();
    RUBRIC_CATEGORIES.forEach((category, index) => form.setScore(category, index + 1));
    expect(form.payload()).toEqual({
      clarity: 1,
      conciseness: 2,
      correctness: 3,
      citations_context: 4,
      contribution: 5,
    });
  });

  it("payload throws while incomplete", () => {
    const form = new RubricForm();
    form.setScore("clarity", 4);
    expect(() => form.payload()).toThrow(/missing/);
  });

  it("prefills from a saved evaluation", () => {
    const form = new RubricForm();
    form.prefill({
      scores: { clarity: 2, conciseness: 3, correctness: 4, citations_context: 5, contribution: 1 },
      comment: "earlier note",
    });
    expect(form.complete).toBe(true);
    expect(form.getScore("citations_context")).toBe(5);
    expect(form.comment).toBe("earlier note");
  });
});

describe("rubric descriptions", () => {
  it("cover every category and level", () => {
    for (const category of RUBRIC_CATEGORIES) {
      const description = DEFAULT_DESCRIPTIONS[category];
      expect(description.label.length).toBeGreaterThan(0);
      for (const level of ["1", "2", "3", "4", "5"]) {
        expect(description.levels[level]?.length).toBeGreaterThan(0);
      }
    }
  });

  it("loadDescriptions falls back to defaults when the config is missing", async () => {
    const fetchImpl = (async () => new Response("nope", { status: 404 })) as typeof fetch;
    expect(await loadDescriptions("config/rubric-descriptions.json", fetchImpl)).toEqual(
      DEFAULT_DESCRIPTIONS,
    );
  });

  it("loadDescriptions uses the fetched config when present", async () => {
    const custom = structuredClone(DEFAULT_DESCRIPTIONS);
    custom.clarity.label = "Custom clarity";
    const fetchImpl = (async () =>
      new Response(JSON.stringify(custom), {
        status: 200,
        headers: { "content-type": "application/json" },
      })) as typeof fetch;
    const loaded = await loadDescriptions("config/rubric-descriptions.json", fetchImpl);
    expect(loaded.clarity.label).toBe("Custom clarity");
  });
});
