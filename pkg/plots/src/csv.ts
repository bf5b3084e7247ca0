/**
 * Readers for the solver's CSV files.
 *
 * Snapshots carry one row per interior grid node in row-major order with
 * header x1[,x2[,x3]],re,im,abs2; sweeps carry param,value,error,rate with
 * an empty rate on the first row.
 */

import * as fs from "node:fs";

export class FormatError extends Error {}

export interface SnapshotTable {
  /** sorted unique coordinates per axis */
  axes: number[][];
  /** abs2 indexed [ix1][ix2] (2-d snapshots) */
  density: number[][];
  nx: number;
  ny: number;
}

export interface SweepTable {
  param: string;
  values: number[];
  errors: number[];
  /** pairwise log-log rates as written by the solver (first entry null) */
  rates: Array<number | null>;
}

function splitRows(text: string): string[][] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.trim().length > 0 && !line.startsWith("#"))
    .map((line) => line.split(","));
}

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

export function readSnapshot(path: string): SnapshotTable {
  const rows = splitRows(fs.readFileSync(path, "utf-8"));
  if (rows.length < 2) throw new FormatError(`${path}: empty snapshot`);
  const header = rows[0];
  if (header[0] !== "x1" || header[header.length - 1] !== "abs2") {
    throw new FormatError(`${path}: not a snapshot file (header ${header.join(",")})`);
  }
  const coordCount = header.length - 3;
  if (coordCount !== 2) {
    throw new FormatError(`${path}: heatmaps need 2-d snapshots, got d=${coordCount}`);
  }
  const body = rows.slice(1).map((cells) => {
    if (cells.length !== header.length) {
      throw new FormatError(`${path}: ragged row with ${cells.length} cells`);
    }
    return cells.map(Number);
  });
  for (const cells of body) {
    if (cells.some((v) => Number.isNaN(v))) {
      throw new FormatError(`${path}: non-numeric cell`);
    }
  }
  const x1 = uniqueSorted(body.map((r) => r[0]));
  const x2 = uniqueSorted(body.map((r) => r[1]));
  if (x1.length * x2.length !== body.length) {
    throw new FormatError(
      `${path}: ragged grid (${x1.length} x ${x2.length} != ${body.length} rows)`,
    );
  }
  const density: number[][] = x1.map(() => new Array(x2.length).fill(NaN));
  // rows are row-major: x1 varies slowest
  body.forEach((cells, i) => {
    const ix = Math.floor(i / x2.length);
    const iy = i % x2.length;
    if (cells[0] !== x1[ix] || cells[1] !== x2[iy]) {
      throw new FormatError(`${path}: rows are not in row-major node order`);
    }
    density[ix][iy] = cells[cells.length - 1];
  });
  return { axes: [x1, x2], density, nx: x1.length, ny: x2.length };
}

export function readSweep(path: string): SweepTable {
  const rows = splitRows(fs.readFileSync(path, "utf-8"));
  if (rows.length < 2) throw new FormatError(`${path}: empty sweep`);
  const header = rows[0].join(",");
  if (header !== "param,value,error,rate") {
    throw new FormatError(`${path}: not a sweep file (header ${header})`);
  }
  const values: number[] = [];
  const errors: number[] = [];
  const rates: Array<number | null> = [];
  let param = "";
  for (const cells of rows.slice(1)) {
    if (cells.length !== 4) throw new FormatError(`${path}: ragged sweep row`);
    param = cells[0];
    const value = Number(cells[1]);
    const error = Number(cells[2]);
    if (!Number.isFinite(value) || !Number.isFinite(error)) {
      throw new FormatError(`${path}: non-numeric sweep row`);
    }
    values.push(value);
    errors.push(error);
    rates.push(cells[3].trim() === "" ? null : Number(cells[3]));
  }
  return { param, values, errors, rates };
}
