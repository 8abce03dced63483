/**
 * Series extraction: group harness rows into (x, y) polylines.
 *
 * Seed-averaged rows (empty seed cell) are preferred for the main curves
 * when any are present; per-seed rows can additionally be kept for
 * translucent background curves.
 */

import { numeric, requireColumns, Row, Table } from "./csv.js";

export interface Series {
  key: string;
  x: number[];
  y: number[];
  /** true for per-seed background curves drawn translucent */
  background: boolean;
}

export interface SeriesOptions {
  x: string;
  y: string;
  group: string[];
  perSeed: boolean;
}

function groupKey(row: Row, group: string[]): string {
  return group.map((g) => `${g}=${row[g] ?? ""}`).join(" ");
}

export function extractSeries(tables: Table[], opts: SeriesOptions): Series[] {
  for (const table of tables) {
    requireColumns(table, [opts.x, opts.y, ...opts.group]);
  }
  const rows: Row[] = tables.flatMap((t) => t.rows);
  const hasAveraged = rows.some((r) => (r["seed"] ?? "") === "");

  const main = new Map<string, { x: number[]; y: number[] }>();
  const backs = new Map<string, { x: number[]; y: number[] }>();

  for (const row of rows) {
    const x = numeric(row, opts.x);
    const y = numeric(row, opts.y);
    if (x === null || y === null) {
      continue;
    }
    const averaged = (row["seed"] ?? "") === "";
    const key = groupKey(row, opts.group);
    const isMain = hasAveraged ? averaged : true;
    if (isMain) {
      const bucket = main.get(key) ?? { x: [], y: [] };
      bucket.x.push(x);
      bucket.y.push(y);
      main.set(key, bucket);
    } else if (opts.perSeed) {
      const seedKey = `${key} seed=${row["seed"]}`;
      const bucket = backs.get(seedKey) ?? { x: [], y: [] };
      bucket.x.push(x);
      bucket.y.push(y);
      backs.set(seedKey, bucket);
    }
  }

  const series: Series[] = [];
  for (const [key, data] of backs) {
    series.push({ key, x: data.x, y: data.y, background: true });
  }
  for (const [key, data] of main) {
    series.push({ key, x: data.x, y: data.y, background: false });
  }
  return series;
}
