// Pure builders turning validated service payloads into render-ready
// structures. Every displayed number is formatted from a payload value;
// only bar/radar geometry (presentation scaling) is computed here.

import { MenuDocT, QueryDocT } from "./schema";

export const SIGNIFICANT_DIGITS = 4;

export function formatValue(v: number): string {
  return v.toPrecision(SIGNIFICANT_DIGITS);
}

export interface ObjectiveRow {
  name: string;
  orientation: "min" | "max";
  value: number;
  display: string;
  /** goodness in [0, 1] relative to the other option (1 = better end) */
  barFraction: number;
  better: boolean;
}

export interface QueryCard {
  label: string;
  choice: 1 | 2;
  rows: ObjectiveRow[];
  /** SVG polygon points for the radar overlay (m <= 9 only) */
  radarPoints: string | null;
}

export interface QueryViewModel {
  seq: number;
  origin: string;
  progressText: string;
  cards: [QueryCard, QueryCard];
}

function goodness(value: number, other: number, orientation: "min" | "max"): number {
  if (value === other) {
    return 0.5;
  }
  const lo = Math.min(value, other);
  const hi = Math.max(value, other);
  const frac = (value - lo) / (hi - lo);
  return orientation === "max" ? frac : 1 - frac;
}

function radar(fractions: number[]): string | null {
  const m = fractions.length;
  if (m > 9) {
    return null;
  }
  const pts = fractions.map((f, i) => {
    const angle = (2 * Math.PI * i) / m - Math.PI / 2;
    const r = 10 + 38 * f; // keep degenerate polygons visible
    const x = 50 + r * Math.cos(angle);
    const y = 50 + r * Math.sin(angle);
    return `${x.toFixed(2)},${y.toFixed(2)}`;
  });
  return pts.join(" ");
}

export function buildQueryView(doc: QueryDocT): QueryViewModel {
  const m = doc.objective_names.length;
  const cards = [0, 1].map((idx) => {
    const mine = doc.options[idx as 0 | 1].objectives;
    const theirs = doc.options[(1 - idx) as 0 | 1].objectives;
    const rows: ObjectiveRow[] = [];
    for (let j = 0; j < m; j++) {
      const frac = goodness(mine[j], theirs[j], doc.orientations[j]);
      rows.push({
        name: doc.objective_names[j],
        orientation: doc.orientations[j],
        value: mine[j],
        display: formatValue(mine[j]),
        barFraction: frac,
        better: frac > 0.5,
      });
    }
    return {
      label: idx === 0 ? "Option A" : "Option B",
      choice: (idx + 1) as 1 | 2,
      rows,
      radarPoints: radar(rows.map((r) => r.barFraction)),
    };
  });
  const p = doc.progress;
  const initial =
    (p.initial_remaining ?? 0) > 0
      ? `warm-up ${p.initial_total! - p.initial_remaining!} of ${p.initial_total}, then `
      : "";
  return {
    seq: doc.seq,
    origin: doc.origin,
    progressText: `${initial}interaction ${p.interaction} of ${p.budget}`,
    cards: cards as [QueryCard, QueryCard],
  };
}

export interface MenuItemView {
  rank: number;
  rows: { name: string; orientation: string; display: string; value: number }[];
  meanDisplay: string;
  sdDisplay: string;
}

export interface MenuViewModel {
  k: number;
  construction: string;
  expectedBestDisplay: string;
  items: MenuItemView[];
  exportJson: string;
}

export function buildMenuView(doc: MenuDocT): MenuViewModel {
  const items = doc.objectives.map((objs, i) => ({
    rank: i + 1,
    rows: objs.map((v, j) => ({
      name: doc.objective_names[j],
      orientation: doc.orientations[j],
      display: formatValue(v),
      value: v,
    })),
    meanDisplay: formatValue(doc.item_means[i]),
    sdDisplay: formatValue(Math.sqrt(Math.max(doc.item_variances[i], 0))),
  }));
  return {
    k: doc.k,
    construction: doc.construction,
    expectedBestDisplay: formatValue(doc.expected_best_utility),
    items,
    exportJson: JSON.stringify(doc, null, 1),
  };
}

/** Every number rendered by a view-model, for traceability checks. */
export function renderedNumbers(view: QueryViewModel | MenuViewModel): number[] {
  if ("cards" in view) {
    return view.cards.flatMap((c) => c.rows.map((r) => r.value));
  }
  return view.items.flatMap((it) => it.rows.map((r) => r.value));
}
