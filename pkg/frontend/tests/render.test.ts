import { describe, expect, it } from "vitest";

import { renderChips, renderResultsGrid } from "../src/render.js";
import { initialState, setClassifier, setImage, toggleTypeChip } from "../src/state.js";
import type { RetrieveResult } from "../src/types.js";

function result(id: string, total: number): RetrieveResult {
  return {
    id,
    image_url: `/v1/images/${id}`,
    attributes: { type: "bar", color: "categorical" },
    scores: { total, s_global: 0.9, s_intent: 0.0, s_match: 0.8 },
  };
}

describe("result grid", () => {
  it("preserves API order exactly, even when scores look unsorted", () => {
    const results = [result("b", 10.0), result("a", 99.0), result("c", 5.0)];
    const html = renderResultsGrid(results);
    const ids = [...html.matchAll(/data-id="([^"]+)"/g)].map((m) => m[1]);
    expect(ids).toEqual(["b", "a", "c"]);
    const ranks = [...html.matchAll(/data-rank="(\d+)"/g)].map((m) => m[1]);
    expect(ranks).toEqual(["1", "2", "3"]);
  });

  it("links each cell to the served image", () => {
    const html = renderResultsGrid([result("bar_007", 1.0)]);
    expect(html).toContain('src="/v1/images/bar_007"');
  });

  it("escapes markup in ids and attributes", () => {
    const r = result('x"><script>', 1.0);
    const html = renderResultsGrid([r]);
    expect(html).not.toContain("<script>");
  });

  it("renders an empty message for no results", () => {
    expect(renderResultsGrid([])).toContain("No charts matched");
  });
});

describe("chips", () => {
  it("shows active chips and the selected custom label", () => {
    let s = setImage(initialState(), "SU1HMQ==");
    s = toggleTypeChip(s, "bar");
    s = setClassifier(s, {
      name: "style",
      labels: ["3D style", "Flat style"],
      selectedIndex: 1,
    });
    const html = renderChips(s);
    expect(html).toContain(">bar<");
    expect(html).toContain("style: Flat style");
  });

  it("renders no chips for a fresh state", () => {
    expect(renderChips(initialState())).toBe('<div class="chips"></div>');
  });
});
