/**
 * Parser for the benchmark harness CSV schema.
 *
 * One flat schema serves both applications: header row, comma separated,
 * '.' decimal, empty cells for missing metrics. Seed-averaged companion
 * files carry an empty seed column.
 */

import { readFileSync } from "fs";

export const SCHEMA_COLUMNS = [
  "run_id", "method", "N", "seed", "k", "time_s", "mu_k", "delta_k",
  "outer_samples", "inner_samples", "dist_sq", "objective", "accuracy",
  "loss", "inner_iters", "certificate", "flag",
] as const;

export interface Row {
  [column: string]: string;
}

export interface Table {
  path: string;
  columns: string[];
  rows: Row[];
}

export class SchemaError extends Error {}

export function parseCsvText(text: string, path = "<memory>"): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file (no header row)`);
  }
  const columns = lines[0].split(",");
  const rows: Row[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(
        `${path}:${i + 1}: expected ${columns.length} cells, got ${cells.length}`,
      );
    }
    const row: Row = {};
    columns.forEach((name, j) => {
      row[name] = cells[j];
    });
    rows.push(row);
  }
  return { path, columns, rows };
}

export function readCsv(path: string): Table {
  return parseCsvText(readFileSync(path, "utf-8"), path);
}

/** Throws a SchemaError naming the first column the table is missing. */
export function requireColumns(table: Table, names: string[]): void {
  for (const name of names) {
    if (!table.columns.includes(name)) {
      throw new SchemaError(`${table.path}: missing column "${name}"`);
    }
  }
}

export function numeric(row: Row, column: string): number | null {
  const cell = row[column];
  if (cell === undefined || cell === "") {
    return null;
  }
  const value = Number(cell);
  return Number.isNaN(value) ? null : value;
}
