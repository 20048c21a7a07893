/** Reader for the planner's exported window datasets.
 *
 * A dataset directory holds `manifest.json` plus one `conn_<id>.csv` per
 * connection.  Each CSV row is `t, x_0..x_{k*r-1}, y_1..y_u`: `t` is the
 * last input interval's index, the inputs are the raw samples of the r
 * intervals ending at `t` (k samples per interval, oldest first), and the
 * targets are the next u interval maxima.  Values are in trace units; the
 * manifest's `scale` restores planner units downstream.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface Manifest {
  r: number;
  u: number;
  k: number;
  tau_minutes: number;
  scale: number;
  unit: string;
  connections: number[];
}

export interface TrainingWindow {
  /** Index of the last input interval. */
  t: number;
  /** k*r raw samples, oldest interval first. */
  inputs: Float64Array;
  /** u interval maxima for t+1 .. t+u. */
  targets: Float64Array;
}

export interface ConnDataset {
  conn: number;
  r: number;
  u: number;
  k: number;
  windows: TrainingWindow[];
}

export class DatasetError extends Error {}

function requireNumber(obj: Record<string, unknown>, key: string, where: string): number {
  const v = obj[key];
  if (typeof v !== "number" || !Number.isFinite(v)) {
    throw new DatasetError(`${where}: manifest key ${key} missing or not a number`);
  }
  return v;
}

export function loadManifest(dir: string): Manifest {
  const file = path.join(dir, "manifest.json");
  let text: string;
  try {
    text = fs.readFileSync(file, "utf8");
  } catch {
    throw new DatasetError(`${dir}: missing manifest.json`);
  }
  let raw: Record<string, unknown>;
  try {
    raw = JSON.parse(text) as Record<string, unknown>;
  } catch (e) {
    throw new DatasetError(`${file}: not valid JSON (${(e as Error).message})`);
  }
  const connections = raw["connections"];
  if (!Array.isArray(connections) || connections.some((c) => typeof c !== "number")) {
    throw new DatasetError(`${file}: connections must be a list of ids`);
  }
  return {
    r: requireNumber(raw, "r", file),
    u: requireNumber(raw, "u", file),
    k: requireNumber(raw, "k", file),
    tau_minutes: requireNumber(raw, "tau_minutes", file),
    scale: requireNumber(raw, "scale", file),
    unit: typeof raw["unit"] === "string" ? (raw["unit"] as string) : "gbps",
    connections: connections as number[],
  };
}

export function loadConnDataset(dir: string, manifest: Manifest, conn: number): ConnDataset {
  const { r, u, k } = manifest;
  const file = path.join(dir, `conn_${conn}.csv`);
  let text: string;
  try {
    text = fs.readFileSync(file, "utf8");
  } catch {
    throw new DatasetError(`${dir}: missing conn_${conn}.csv`);
  }
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new DatasetError(`${file}: empty file`);
  }
  const width = 1 + k * r + u;
  const header = lines[0].split(",");
  if (header.length !== width || header[0] !== "t") {
    throw new DatasetError(
      `${file}: header has ${header.length} columns, manifest implies ${width}`,
    );
  }
  const windows: TrainingWindow[] = [];
  for (let ln = 1; ln < lines.length; ln++) {
    const cells = lines[ln].split(",");
    if (cells.length !== width) {
      throw new DatasetError(`${file}:${ln + 1}: expected ${width} columns, got ${cells.length}`);
    }
    const values = cells.map(Number);
    if (values.some((v) => !Number.isFinite(v))) {
      throw new DatasetError(`${file}:${ln + 1}: non-numeric cell`);
    }
    windows.push({
      t: values[0],
      inputs: Float64Array.from(values.slice(1, 1 + k * r)),
      targets: Float64Array.from(values.slice(1 + k * r)),
    });
  }
  if (windows.length === 0) {
    throw new DatasetError(`${file}: no windows`);
  }
  return { conn, r, u, k, windows };
}

export function loadDataset(dir: string): { manifest: Manifest; datasets: Map<number, ConnDataset> } {
  const manifest = loadManifest(dir);
  const datasets = new Map<number, ConnDataset>();
  for (const conn of manifest.connections) {
    datasets.set(conn, loadConnDataset(dir, manifest, conn));
  }
  return { manifest, datasets };
}

/** Total interval count of the series a dataset was cut from. */
export function seriesLength(ds: ConnDataset): number {
  // Windows run t = r-1 .. T-u-1, so the last one pins T.
  return ds.windows[ds.windows.length - 1].t + ds.u + 1;
}
