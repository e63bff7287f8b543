// View-model builders: everything rendered must trace back to the payload.

import { describe, expect, it } from "vitest";
import { MenuDoc, QueryDoc } from "../src/schema";
import {
  buildMenuView,
  buildQueryView,
  formatValue,
  renderedNumbers,
} from "../src/viewmodel";
import { fixtures } from "./fixtures";

const query = QueryDoc.parse(fixtures.query);
const menu = MenuDoc.parse(fixtures.menu);

describe("query view", () => {
  it("renders both cards with the same objective ordering", () => {
    const view = buildQueryView(query);
    const namesA = view.cards[0].rows.map((r) => r.name);
    const namesB = view.cards[1].rows.map((r) => r.name);
    expect(namesA).toEqual(namesB);
    expect(namesA).toEqual([...query.objective_names]);
  });

  it("never fabricates a value: every rendered number is a payload number", () => {
    const view = buildQueryView(query);
    const payloadNumbers = new Set([
      ...query.options[0].objectives,
      ...query.options[1].objectives,
    ]);
    for (const value of renderedNumbers(view)) {
      expect(payloadNumbers.has(value)).toBe(true);
    }
    for (const card of view.cards) {
      for (const row of card.rows) {
        expect(row.display).toBe(formatValue(row.value));
      }
    }
  });

  it("bar fractions stay in [0,1] and favor the oriented better value", () => {
    const view = buildQueryView(query);
    for (let j = 0; j < query.objective_names.length; j++) {
      const a = view.cards[0].rows[j];
      const b = view.cards[1].rows[j];
      expect(a.barFraction).toBeGreaterThanOrEqual(0);
      expect(a.barFraction).toBeLessThanOrEqual(1);
      expect(a.barFraction + b.barFraction).toBeCloseTo(1, 12);
      const better =
        query.orientations[j] === "min"
          ? a.value < b.value
          : a.value > b.value;
      if (a.value !== b.value) {
        expect(a.better).toBe(better);
        expect(b.better).toBe(!better);
      }
    }
  });

  it("equal values split the bar evenly", () => {
    const doc = JSON.parse(JSON.stringify(fixtures.query));
    doc.options[1].objectives = [...doc.options[0].objectives];
    const view = buildQueryView(QueryDoc.parse(doc));
    for (const row of view.cards[0].rows) {
      expect(row.barFraction).toBe(0.5);
      expect(row.better).toBe(false);
    }
  });

  it("radar overlay only for at most nine objectives", () => {
    const view = buildQueryView(query);
    expect(view.cards[0].radarPoints).not.toBeNull();
    const wide = JSON.parse(JSON.stringify(fixtures.query));
    wide.objective_names = Array.from({ length: 10 }, (_, i) => `f${i + 1}`);
    wide.orientations = Array(10).fill("min");
    wide.options[0].objectives = Array(10).fill(1.0);
    wide.options[1].objectives = Array(10).fill(2.0);
    expect(buildQueryView(QueryDoc.parse(wide)).cards[0].radarPoints).toBeNull();
  });

  it("progress text counts interactions against the budget", () => {
    const view = buildQueryView(query);
    expect(view.progressText).toContain(
      `${query.progress.interaction} of ${query.progress.budget}`,
    );
  });
});

describe("menu view", () => {
  it("card order matches the service ranking", () => {
    const view = buildMenuView(menu);
    expect(view.items.map((i) => i.rank)).toEqual(
      Array.from({ length: menu.k }, (_, i) => i + 1),
    );
    for (let i = 0; i < menu.k; i++) {
      expect(view.items[i].rows.map((r) => r.value)).toEqual([
        ...menu.objectives[i],
      ]);
    }
  });

  it("rendered menu numbers trace back to the payload", () => {
    const view = buildMenuView(menu);
    const payloadNumbers = new Set(menu.objectives.flat());
    for (const value of renderedNumbers(view)) {
      expect(payloadNumbers.has(value)).toBe(true);
    }
  });

  it("export is the verbatim payload", () => {
    const view = buildMenuView(menu);
    // JSON.stringify canonicalizes -0 to 0, so compare both sides after
    // one serialization round trip
    expect(JSON.parse(view.exportJson)).toEqual(JSON.parse(JSON.stringify(menu)));
  });
});
