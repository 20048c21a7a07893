/** Shared fixtures: synthetic seasonal series and dataset directories laid
 * out exactly like the planner's export (manifest.json + conn_<id>.csv). */

import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { mulberry32 } from "../src/rng.js";

export function tmpdir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), prefix));
}

export interface SeriesSpec {
  /** Number of tau-minute intervals. */
  T: number;
  /** Samples per interval. */
  k: number;
  base: number;
  amplitude: number;
  /** Season length in samples. */
  period: number;
  /** Uniform noise half-width. */
  noise: number;
  phase?: number;
  seed: number;
}

/** Seasonal sample series: base + amplitude*sin + uniform noise, floored at 0. */
export function syntheticSeries(spec: SeriesSpec): number[] {
  const rng = mulberry32(spec.seed);
  const samples: number[] = [];
  const n = spec.T * spec.k;
  for (let i = 0; i < n; i++) {
    const angle = (2 * Math.PI * i) / spec.period + (spec.phase ?? 0);
    const value =
      spec.base + spec.amplitude * Math.sin(angle) + spec.noise * (2 * rng() - 1);
    samples.push(Math.max(0, value));
  }
  return samples;
}

export interface DatasetFixture {
  dir: string;
  T: number;
}

/** Cut sliding windows the way the planner exports them and write a dataset
 * directory: window t holds the raw samples of intervals t-r+1..t and the
 * interval maxima of t+1..t+u. */
export function writeDataset(
  dir: string,
  series: Map<number, number[]>,
  r: number,
  u: number,
  k: number,
  tauMinutes = 5,
  scale = 30,
): DatasetFixture {
  fs.mkdirSync(dir, { recursive: true });
  const conns = [...series.keys()].sort((a, b) => a - b);
  let T = -1;
  for (const conn of conns) {
    const samples = series.get(conn)!;
    const n = Math.floor(samples.length / k);
    if (T === -1) T = n;
    if (n !== T) throw new Error("series lengths disagree");
    const maxima: number[] = [];
    for (let i = 0; i < n; i++) {
      maxima.push(Math.max(...samples.slice(i * k, (i + 1) * k)));
    }
    const header = ["t"];
    for (let i = 0; i < k * r; i++) header.push(`x_${i}`);
    for (let j = 1; j <= u; j++) header.push(`y_${j}`);
    const lines = [header.join(",")];
    for (let t = r - 1; t < n - u; t++) {
      const row: string[] = [String(t)];
      for (let iv = t - r + 1; iv <= t; iv++) {
        for (let j = 0; j < k; j++) row.push(String(samples[iv * k + j]));
      }
      for (let j = 1; j <= u; j++) row.push(String(maxima[t + j]));
      lines.push(row.join(","));
    }
    fs.writeFileSync(path.join(dir, `conn_${conn}.csv`), lines.join("\n") + "\n");
  }
  const manifest = {
    r,
    u,
    k,
    tau_minutes: tauMinutes,
    scale,
    unit: "gbps",
    connections: conns,
  };
  fs.writeFileSync(path.join(dir, "manifest.json"), JSON.stringify(manifest, null, 2));
  return { dir, T };
}
