/** Training loop: seeded batches, plateau-driven LR reduction, early stop.
 *
 * Splits are chronological — the last 20% of windows is the held-out test
 * set and the 80% before it is divided 75/25 into train and validation —
 * so the model never peeks past the time axis.
 */

import * as tf from "@tensorflow/tfjs";

import { ConnDataset, TrainingWindow } from "./dataset.js";
import { EdLstm, ModelConfig, huberLoss, mseLoss } from "./model.js";
import { MinMax, fitMinMax, normalizeInto } from "./normalize.js";
import { mulberry32, shuffle } from "./rng.js";

export type LossKind = "huber" | "mse";

export interface TrainOptions {
  loss: LossKind;
  seed: number;
  /** Epochs without validation improvement before training stops. */
  stopPatience: number;
}

export const DEFAULT_STOP_PATIENCE = 25;

export interface EpochStat {
  epoch: number;
  trainLoss: number;
  valLoss: number;
  lr: number;
}

export interface TrainReport {
  config: ModelConfig;
  loss: LossKind;
  seed: number;
  epochs: EpochStat[];
  bestEpoch: number;
  bestValLoss: number;
  /** Training-loss metric on the held-out 20%, normalized space. */
  testLoss: number;
  /** Squared error on the held-out 20%, data units. */
  testMse: number;
  /** Same metric for the repeat-last-value baseline on the same split. */
  persistenceMse: number;
  wallMs: number;
}

export interface SplitWindows {
  train: TrainingWindow[];
  val: TrainingWindow[];
  test: TrainingWindow[];
}

export function chronologicalSplit(windows: TrainingWindow[]): SplitWindows {
  const n = windows.length;
  const nTest = Math.floor(n / 5);
  const rest = n - nTest;
  const nVal = Math.floor(rest / 4);
  const nTrain = rest - nVal;
  return {
    train: windows.slice(0, nTrain),
    val: windows.slice(nTrain, nTrain + nVal),
    test: windows.slice(nTrain + nVal),
  };
}

/** Pack windows into normalized input/target tensors for a model of length
 * r (slicing the last k*r samples when the dataset was cut wider). */
function packTensors(
  windows: TrainingWindow[],
  r: number,
  k: number,
  u: number,
  bounds: MinMax,
): { xs: tf.Tensor3D; ys: tf.Tensor2D } {
  const need = k * r;
  const n = windows.length;
  const xData = new Float32Array(n * need);
  const yData = new Float32Array(n * u);
  for (let i = 0; i < n; i++) {
    const w = windows[i];
    if (w.inputs.length < need) {
      throw new Error(`window at t=${w.t} has ${w.inputs.length} samples; need ${need}`);
    }
    normalizeInto(w.inputs.subarray(w.inputs.length - need), xData, i * need, bounds);
    normalizeInto(w.targets, yData, i * u, bounds);
  }
  return {
    xs: tf.tensor3d(xData, [n, r, k]),
    ys: tf.tensor2d(yData, [n, u]),
  };
}

/** Repeat-last-interval-maximum forecast, squared error in data units. */
export function persistenceMse(windows: TrainingWindow[], k: number): number {
  let sum = 0;
  let count = 0;
  for (const w of windows) {
    let last = -Infinity;
    for (let i = w.inputs.length - k; i < w.inputs.length; i++) {
      if (w.inputs[i] > last) last = w.inputs[i];
    }
    for (let j = 0; j < w.targets.length; j++) {
      const d = w.targets[j] - last;
      sum += d * d;
      count++;
    }
  }
  return count ? sum / count : 0;
}

/** Model forecast squared error in data units (predictions clamped at 0). */
export function modelMse(model: EdLstm, windows: TrainingWindow[]): number {
  let sum = 0;
  let count = 0;
  for (const w of windows) {
    const pred = model.predictOne(w.inputs);
    for (let j = 0; j < w.targets.length; j++) {
      const d = w.targets[j] - pred[j];
      sum += d * d;
      count++;
    }
  }
  return count ? sum / count : 0;
}

export interface TrainOutcome {
  model: EdLstm;
  report: TrainReport;
}

export function trainModel(
  ds: ConnDataset,
  config: ModelConfig,
  opts: TrainOptions,
): TrainOutcome {
  const t0 = Date.now();
  const { train, val, test } = chronologicalSplit(ds.windows);
  if (train.length < 1 || val.length < 1 || test.length < 1) {
    throw new Error(
      `connection ${ds.conn}: ${ds.windows.length} windows cannot fill train/val/test splits`,
    );
  }
  const bounds = fitMinMax(
    (function* () {
      for (const w of train) {
        yield w.inputs;
        yield w.targets;
      }
    })(),
  );
  const model = new EdLstm(config, ds.k, bounds, opts.seed);
  const lossFn =
    opts.loss === "huber"
      ? (a: tf.Tensor, b: tf.Tensor) => huberLoss(a, b, config.delta)
      : mseLoss;

  const { xs: xsTrain, ys: ysTrain } = packTensors(train, config.r, ds.k, config.u, bounds);
  const { xs: xsVal, ys: ysVal } = packTensors(val, config.r, ds.k, config.u, bounds);
  const { xs: xsTest, ys: ysTest } = packTensors(test, config.r, ds.k, config.u, bounds);

  const optimizer = tf.train.adam(config.lr);
  const vars = model.trainableVariables();
  const rng = mulberry32((opts.seed ^ 0x5f3759df) >>> 0);
  const order = new Int32Array(train.length);
  for (let i = 0; i < order.length; i++) order[i] = i;

  const stats: EpochStat[] = [];
  let lr = config.lr;
  let bestVal = Infinity;
  let bestEpoch = 0;
  let bestWeights = model.weightData();
  let lrWait = 0;
  let stopWait = 0;

  const evalLoss = (xs: tf.Tensor3D, ys: tf.Tensor2D): number => {
    const scalar = tf.tidy(() => lossFn(ys, model.forward(xs)));
    const value = scalar.dataSync()[0];
    scalar.dispose();
    return value;
  };

  try {
    for (let epoch = 1; epoch <= config.maxEpochs; epoch++) {
      shuffle(order, rng);
      let lossSum = 0;
      for (let start = 0; start < order.length; start += config.batch) {
        const idx = order.subarray(start, Math.min(order.length, start + config.batch));
        const cost = tf.tidy(() => {
          const idxT = tf.tensor1d(idx, "int32");
          const xb = tf.gather(xsTrain, idxT) as tf.Tensor3D;
          const yb = tf.gather(ysTrain, idxT) as tf.Tensor2D;
          return optimizer.minimize(() => lossFn(yb, model.forward(xb)), true, vars)!;
        });
        lossSum += cost.dataSync()[0] * idx.length;
        cost.dispose();
      }
      const trainLoss = lossSum / order.length;
      const valLoss = evalLoss(xsVal, ysVal);
      if (!Number.isFinite(trainLoss) || !Number.isFinite(valLoss)) {
        throw new Error(
          `non-finite loss at epoch ${epoch} (train=${trainLoss} val=${valLoss}) ` +
            `for config ${JSON.stringify(config)}`,
        );
      }
      stats.push({ epoch, trainLoss, valLoss, lr });

      if (valLoss < bestVal) {
        bestVal = valLoss;
        bestEpoch = epoch;
        bestWeights = model.weightData();
        lrWait = 0;
        stopWait = 0;
      } else {
        lrWait++;
        stopWait++;
        if (lrWait >= config.lrPatience) {
          lr *= config.lrFactor;
          (optimizer as unknown as { learningRate: number }).learningRate = lr;
          lrWait = 0;
        }
        if (stopWait >= opts.stopPatience) {
          break;
        }
      }
    }

    model.loadWeightData(bestWeights);
    const report: TrainReport = {
      config,
      loss: opts.loss,
      seed: opts.seed,
      epochs: stats,
      bestEpoch,
      bestValLoss: bestVal,
      testLoss: evalLoss(xsTest, ysTest),
      testMse: modelMse(model, test),
      persistenceMse: persistenceMse(test, ds.k),
      wallMs: Date.now() - t0,
    };
    return { model, report };
  } catch (err) {
    model.dispose();
    throw err;
  } finally {
    xsTrain.dispose();
    ysTrain.dispose();
    xsVal.dispose();
    ysVal.dispose();
    xsTest.dispose();
    ysTest.dispose();
    optimizer.dispose();
  }
}
