#!/usr/bin/env node
/** Command line: `train` fits one model per connection via grid search and
 * saves it with a JSON-lines training log; `predict` loads saved models and
 * writes a prediction CSV the planner can ingest.
 *
 * Exit codes mirror the planner: 0 success, 2 configuration errors, 3 data
 * errors.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { parseArgs } from "node:util";

import { backendName, initBackend } from "./backend.js";
import { DatasetError, loadDataset } from "./dataset.js";
import { emitPredictions, StepPredictor } from "./emit.js";
import { defaultGridOptions, gridSearch } from "./grid.js";
import { ConfigGrid, EdLstm, fullGrid, SerializedModel, smokeGrid } from "./model.js";
import { LossKind } from "./train.js";

class ConfigError extends Error {}

const USAGE = `usage:
  eonplan-forecast train --dataset DIR --out DIR [--grid full|smoke] [--grid-file FILE]
                         [--loss huber|mse] [--seed N] [--max-epochs N] [--patience N]
                         [--connections IDS]
  eonplan-forecast predict --dataset DIR --models DIR --t-test N --out FILE`;

function parseIntFlag(value: string | undefined, name: string, fallback: number): number {
  if (value === undefined) return fallback;
  const n = Number(value);
  if (!Number.isInteger(n) || n < 1) throw new ConfigError(`${name} must be a positive integer: ${value}`);
  return n;
}

function resolveGrid(u: number, preset: string, file: string | undefined): ConfigGrid {
  if (file !== undefined) {
    let raw: Partial<ConfigGrid>;
    try {
      raw = JSON.parse(fs.readFileSync(file, "utf8")) as Partial<ConfigGrid>;
    } catch (e) {
      throw new ConfigError(`cannot read grid file ${file}: ${(e as Error).message}`);
    }
    const base = fullGrid(u);
    const grid: ConfigGrid = { ...base, ...raw };
    for (const axis of ["r", "hidden", "batch", "lr", "delta"] as const) {
      const values = grid[axis];
      if (!Array.isArray(values) || values.length === 0 || values.some((v) => typeof v !== "number")) {
        throw new ConfigError(`grid file ${file}: axis ${axis} must be a non-empty number list`);
      }
    }
    return grid;
  }
  if (preset === "full") return fullGrid(u);
  if (preset === "smoke") return smokeGrid(u);
  throw new ConfigError(`unknown grid preset ${preset} (use full or smoke)`);
}

function parseConnections(value: string | undefined, available: number[]): number[] {
  if (value === undefined) return available;
  const ids = value.split(",").map((s) => Number(s.trim()));
  if (ids.length === 0 || ids.some((n) => !Number.isInteger(n) || n < 0)) {
    throw new ConfigError(`--connections must be comma-separated ids: ${value}`);
  }
  for (const id of ids) {
    if (!available.includes(id)) {
      throw new ConfigError(`connection ${id} is not in the dataset (has ${available.join(",")})`);
    }
  }
  return ids;
}

async function cmdTrain(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      dataset: { type: "string" },
      out: { type: "string" },
      grid: { type: "string", default: "full" },
      "grid-file": { type: "string" },
      loss: { type: "string", default: "huber" },
      seed: { type: "string" },
      "max-epochs": { type: "string" },
      patience: { type: "string" },
      connections: { type: "string" },
    },
  });
  if (!values.dataset || !values.out) throw new ConfigError("train needs --dataset and --out");
  if (values.loss !== "huber" && values.loss !== "mse") {
    throw new ConfigError(`--loss must be huber or mse: ${values.loss}`);
  }
  const backend = await initBackend();
  const { manifest, datasets } = loadDataset(values.dataset);
  const conns = parseConnections(values.connections, manifest.connections);
  const grid = resolveGrid(manifest.u, values.grid!, values["grid-file"]);
  const opts = defaultGridOptions({
    loss: values.loss as LossKind,
    seed: values.seed === undefined ? 0 : Number(values.seed) >>> 0,
    maxEpochs: parseIntFlag(values["max-epochs"], "--max-epochs", 1000),
    stopPatience: parseIntFlag(values.patience, "--patience", 25),
  });

  fs.mkdirSync(values.out, { recursive: true });
  const logPath = path.join(values.out, "log.jsonl");
  fs.writeFileSync(logPath, "");
  console.log(`backend: ${backend}; grid of ${gridSize(grid)} candidates per connection`);

  for (const conn of conns) {
    const ds = datasets.get(conn)!;
    const result = gridSearch(ds, grid, opts);
    for (let i = 0; i < result.reports.length; i++) {
      const report = result.reports[i];
      fs.appendFileSync(logPath, JSON.stringify({ kind: "candidate", conn, ...report }) + "\n");
    }
    const better =
      result.best.persistenceMse > 0
        ? 100 * (1 - result.best.testMse / result.best.persistenceMse)
        : NaN;
    fs.appendFileSync(
      logPath,
      JSON.stringify({
        kind: "selected",
        conn,
        bestIndex: result.bestIndex,
        skipped: result.skipped,
        config: result.best.config,
        bestValLoss: result.best.bestValLoss,
        testMse: result.best.testMse,
        persistenceMse: result.best.persistenceMse,
        improvementPct: better,
      }) + "\n",
    );
    const c = result.best.config;
    console.log(
      `conn ${conn}: best r=${c.r} hidden=${c.hidden} batch=${c.batch} lr=${c.lr} ` +
        `delta=${c.delta} | val ${result.best.bestValLoss.toExponential(3)} | held-out mse ` +
        `${result.best.testMse.toFixed(4)} vs persistence ${result.best.persistenceMse.toFixed(4)} ` +
        (Number.isFinite(better) ? `(${better.toFixed(1)}% better)` : "(baseline already exact)"),
    );
    const modelPath = path.join(values.out, `conn_${conn}.json`);
    fs.writeFileSync(modelPath, JSON.stringify(result.model.toJSON()));
    result.model.dispose();
  }
  console.log(`wrote models and log.jsonl to ${values.out}`);
  return 0;
}

function gridSize(grid: ConfigGrid): number {
  return grid.r.length * grid.hidden.length * grid.batch.length * grid.lr.length * grid.delta.length;
}

async function cmdPredict(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      dataset: { type: "string" },
      models: { type: "string" },
      "t-test": { type: "string" },
      out: { type: "string" },
    },
  });
  if (!values.dataset || !values.models || !values["t-test"] || !values.out) {
    throw new ConfigError("predict needs --dataset, --models, --t-test, and --out");
  }
  const tTest = Number(values["t-test"]);
  if (!Number.isInteger(tTest) || tTest < 1) {
    throw new ConfigError(`--t-test must be a positive integer: ${values["t-test"]}`);
  }
  await initBackend();
  const { manifest, datasets } = loadDataset(values.dataset);
  const models = new Map<number, StepPredictor>();
  for (const conn of manifest.connections) {
    const file = path.join(values.models, `conn_${conn}.json`);
    let blob: SerializedModel;
    try {
      blob = JSON.parse(fs.readFileSync(file, "utf8")) as SerializedModel;
    } catch {
      throw new DatasetError(`${values.models}: missing or unreadable conn_${conn}.json`);
    }
    if (blob.config.u !== manifest.u) {
      throw new DatasetError(
        `model for connection ${conn} predicts ${blob.config.u} steps; dataset has u=${manifest.u}`,
      );
    }
    models.set(conn, EdLstm.fromJSON(blob));
  }
  const result = emitPredictions(models, datasets, tTest, values.out);
  console.log(
    `wrote ${result.rows} rows (${result.epochs} epochs x ${datasets.size} connections ` +
      `x u=${manifest.u}) to ${result.path}`,
  );
  return 0;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  try {
    if (command === "train") return await cmdTrain(rest);
    if (command === "predict") return await cmdPredict(rest);
    console.error(USAGE);
    return 2;
  } catch (err) {
    if (err instanceof ConfigError || (err as { code?: string }).code === "ERR_PARSE_ARGS_UNKNOWN_OPTION") {
      console.error(`config error: ${(err as Error).message}`);
      return 2;
    }
    if (err instanceof DatasetError) {
      console.error(`data error: ${(err as Error).message}`);
      return 3;
    }
    throw err;
  }
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(err);
    process.exit(1);
  },
);

export { backendName };
