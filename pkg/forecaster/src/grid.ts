/** Hyperparameter grid enumeration and best-config selection.
 *
 * Candidates are enumerated in a fixed axis order (r, hidden, batch, lr,
 * delta) and ranked by best validation loss; a strict comparison means the
 * earliest candidate wins ties, so a fixed seed pins the whole search.
 */

import { ConnDataset } from "./dataset.js";
import { ConfigGrid, EdLstm, ModelConfig } from "./model.js";
import {
  DEFAULT_STOP_PATIENCE,
  TrainOptions,
  TrainOutcome,
  TrainReport,
  trainModel,
} from "./train.js";
import { deriveSeed } from "./rng.js";

export interface GridOptions {
  loss: TrainOptions["loss"];
  seed: number;
  maxEpochs: number;
  stopPatience: number;
  lrFactor: number;
  lrPatience: number;
}

export function defaultGridOptions(overrides: Partial<GridOptions> = {}): GridOptions {
  return {
    loss: "huber",
    seed: 0,
    maxEpochs: 1000,
    lrFactor: 0.5,
    lrPatience: 10,
    stopPatience: DEFAULT_STOP_PATIENCE,
    ...overrides,
  };
}

export function enumerateConfigs(u: number, grid: ConfigGrid, opts: GridOptions): ModelConfig[] {
  const configs: ModelConfig[] = [];
  for (const r of grid.r) {
    for (const hidden of grid.hidden) {
      for (const batch of grid.batch) {
        for (const lr of grid.lr) {
          for (const delta of grid.delta) {
            configs.push({
              r,
              hidden,
              batch,
              lr,
              delta,
              u,
              maxEpochs: opts.maxEpochs,
              lrFactor: opts.lrFactor,
              lrPatience: opts.lrPatience,
            });
          }
        }
      }
    }
  }
  return configs;
}

export interface GridResult {
  /** Winning candidate's trained model (best weights already restored). */
  model: EdLstm;
  best: TrainReport;
  bestIndex: number;
  /** Every candidate's report, in enumeration order. */
  reports: TrainReport[];
  /** Enumeration indices skipped because the dataset window is too short. */
  skipped: number[];
}

export type TrainFn = (ds: ConnDataset, config: ModelConfig, opts: TrainOptions) => TrainOutcome;

export function gridSearch(
  ds: ConnDataset,
  grid: ConfigGrid,
  opts: GridOptions,
  train: TrainFn = trainModel,
): GridResult {
  const configs = enumerateConfigs(ds.u, grid, opts);
  const reports: TrainReport[] = [];
  const skipped: number[] = [];
  let bestIndex = -1;
  let bestModel: EdLstm | null = null;
  let bestVal = Infinity;

  configs.forEach((config, index) => {
    if (config.r > ds.r) {
      // The exported windows only hold ds.r intervals of history.
      skipped.push(index);
      return;
    }
    const { model, report } = train(ds, config, {
      loss: opts.loss,
      seed: deriveSeed(opts.seed, index),
      stopPatience: opts.stopPatience,
    });
    reports.push(report);
    if (report.bestValLoss < bestVal) {
      bestVal = report.bestValLoss;
      bestIndex = index;
      bestModel?.dispose();
      bestModel = model;
    } else {
      model.dispose();
    }
  });

  if (bestModel === null || bestIndex < 0) {
    throw new Error(
      `no runnable grid candidate: every r in {${grid.r.join(", ")}} exceeds the ` +
        `dataset window length ${ds.r}`,
    );
  }
  const best = reports.find((r) => configs[bestIndex] === r.config)!;
  return { model: bestModel, best, bestIndex, reports, skipped };
}
