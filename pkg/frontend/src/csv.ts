/**
 * Minimal CSV + sidecar reading with hard schema validation.
 *
 * The figure pipeline never recomputes physics, so a file that does not carry
 * exactly the columns a recipe needs is a fatal error, not something to paper
 * over with defaults.
 */

import { readFileSync, readdirSync } from "node:fs";
import { basename, dirname, join } from "node:path";

export class FigureError extends Error {}

export interface Table {
  path: string;
  columns: string[];
  rows: string[][];
}

export function parseCsv(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch {
    throw new FigureError(`cannot read ${path}`);
  }
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new FigureError(`${path}: empty file`);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows = lines.slice(1).map((l) => l.split(","));
  if (rows.length === 0) {
    throw new FigureError(`${path}: no data rows`);
  }
  return { path, columns, rows };
}

/** Numeric column accessor; empty cells become NaN, missing columns are fatal. */
export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new FigureError(
      `${table.path}: missing column "${name}" (have: ${table.columns.join(", ")})`,
    );
  }
  return table.rows.map((r) => {
    const cell = (r[idx] ?? "").trim();
    return cell === "" ? NaN : Number(cell);
  });
}

export function textColumn(table: Table, name: string): string[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new FigureError(`${table.path}: missing column "${name}"`);
  }
  return table.rows.map((r) => (r[idx] ?? "").trim());
}

/** The JSON sidecar written next to every CSV by the producing pipeline. */
export function readSidecar(csvPath: string): Record<string, unknown> {
  const path = `${csvPath}.meta.json`;
  try {
    return JSON.parse(readFileSync(path, "utf8"));
  } catch {
    throw new FigureError(`cannot read sidecar ${path}`);
  }
}

/** Expand a single-directory glob like out/lanczos_eta*.csv (deterministic order). */
export function expandGlob(pattern: string): string[] {
  if (!pattern.includes("*")) {
    return [pattern];
  }
  const dir = dirname(pattern);
  const name = basename(pattern);
  const rx = new RegExp(
    "^" + name.split("*").map(escapeRegex).join(".*") + "$",
  );
  let entries: string[];
  try {
    entries = readdirSync(dir);
  } catch {
    throw new FigureError(`cannot list directory ${dir}`);
  }
  const hits = entries
    .filter((e) => rx.test(e) && !e.endsWith(".meta.json"))
    .sort()
    .map((e) => join(dir, e));
  if (hits.length === 0) {
    throw new FigureError(`no files match ${pattern}`);
  }
  return hits;
}

function escapeRegex(s: string): string {
  return s.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}
