/** Encoder-decoder LSTM for multi-step interval-maximum forecasting.
 *
 * The encoder reads r past intervals (k raw samples per step); its final
 * state seeds a decoder that emits u steps recursively, each step feeding
 * the previous prediction back in as input.  Weights are initialized from
 * a seeded generator so identical configs train identically.
 */

import * as tf from "@tensorflow/tfjs";

import { MinMax, denormalize, normalize } from "./normalize.js";
import { mulberry32, uniform } from "./rng.js";

export interface ModelConfig {
  /** Input window length in intervals. */
  r: number;
  /** LSTM hidden dimension (shared by encoder and decoder). */
  hidden: number;
  /** Training batch size. */
  batch: number;
  /** Initial learning rate. */
  lr: number;
  /** Huber transition point; ignored under squared-error loss. */
  delta: number;
  /** Prediction horizon in intervals. */
  u: number;
  /** Training epoch cap. */
  maxEpochs: number;
  /** Multiplier applied to the learning rate on a validation plateau. */
  lrFactor: number;
  /** Stagnant validation epochs before the learning rate is reduced. */
  lrPatience: number;
}

export interface ConfigGrid {
  r: number[];
  hidden: number[];
  batch: number[];
  lr: number[];
  delta: number[];
}

/** Hyperparameter values considered per horizon u. */
export function fullGrid(u: number): ConfigGrid {
  return {
    r: [u + 2, u + 4, u + 6],
    hidden: [16, 32, 64, 128],
    batch: [64, 128, 256],
    lr: [0.1, 0.01, 0.001],
    delta: [0.5, 1, 1.5, 2],
  };
}

/** One value per axis; handy for wiring tests and quick runs. */
export function smokeGrid(u: number): ConfigGrid {
  return { r: [u + 2], hidden: [16], batch: [128], lr: [0.01], delta: [1] };
}

export function defaultConfig(u: number, overrides: Partial<ModelConfig> = {}): ModelConfig {
  return {
    r: u + 4,
    hidden: 32,
    batch: 128,
    lr: 0.01,
    delta: 1,
    u,
    maxEpochs: 1000,
    lrFactor: 0.5,
    lrPatience: 10,
    ...overrides,
  };
}

interface WeightSpec {
  name: string;
  shape: [number, number];
  fanIn: number;
  fanOut: number;
}

function weightSpecs(k: number, hidden: number): WeightSpec[] {
  const H = hidden;
  return [
    { name: "encWx", shape: [k, 4 * H], fanIn: k, fanOut: 4 * H },
    { name: "encWh", shape: [H, 4 * H], fanIn: H, fanOut: 4 * H },
    { name: "encB", shape: [1, 4 * H], fanIn: 1, fanOut: 4 * H },
    { name: "decWx", shape: [1, 4 * H], fanIn: 1, fanOut: 4 * H },
    { name: "decWh", shape: [H, 4 * H], fanIn: H, fanOut: 4 * H },
    { name: "decB", shape: [1, 4 * H], fanIn: 1, fanOut: 4 * H },
    { name: "headW", shape: [H, 1], fanIn: H, fanOut: 1 },
    { name: "headB", shape: [1, 1], fanIn: 1, fanOut: 1 },
  ];
}

export class EdLstm {
  readonly config: ModelConfig;
  readonly k: number;
  readonly bounds: MinMax;
  private readonly vars: Map<string, tf.Variable>;

  constructor(config: ModelConfig, k: number, bounds: MinMax, seed: number) {
    this.config = config;
    this.k = k;
    this.bounds = bounds;
    this.vars = new Map();
    const rng = mulberry32(seed);
    for (const spec of weightSpecs(k, config.hidden)) {
      const size = spec.shape[0] * spec.shape[1];
      const data = new Float32Array(size);
      if (spec.name.endsWith("B")) {
        // Biases start at zero except the forget gate, which opens at 1 so
        // early training does not wash the cell state out.
        if (spec.name !== "headB") {
          const H = config.hidden;
          for (let i = H; i < 2 * H; i++) data[i] = 1;
        }
      } else {
        const limit = Math.sqrt(6 / (spec.fanIn + spec.fanOut));
        for (let i = 0; i < size; i++) data[i] = uniform(rng, -limit, limit);
      }
      const init = tf.tensor2d(data, spec.shape);
      this.vars.set(spec.name, tf.variable(init, true));
      init.dispose();
    }
  }

  trainableVariables(): tf.Variable[] {
    return [...this.vars.values()];
  }

  private v(name: string): tf.Variable {
    const found = this.vars.get(name);
    if (!found) throw new Error(`no weight named ${name}`);
    return found;
  }

  /** One LSTM step; z-gate order is input, forget, candidate, output. */
  private static step(
    zx: tf.Tensor2D,
    h: tf.Tensor2D,
    c: tf.Tensor2D,
    Wh: tf.Variable,
    b: tf.Variable,
  ): [tf.Tensor2D, tf.Tensor2D] {
    const z = tf.add(tf.add(zx, tf.matMul(h, Wh as unknown as tf.Tensor2D)), b) as tf.Tensor2D;
    const [zi, zf, zg, zo] = tf.split(z, 4, 1) as tf.Tensor2D[];
    const c2 = tf.add(
      tf.mul(tf.sigmoid(zf), c),
      tf.mul(tf.sigmoid(zi), tf.tanh(zg)),
    ) as tf.Tensor2D;
    const h2 = tf.mul(tf.sigmoid(zo), tf.tanh(c2)) as tf.Tensor2D;
    return [h2, c2];
  }

  /** Forward pass: x is [batch, r, k] normalized; returns [batch, u]. */
  forward(x: tf.Tensor3D): tf.Tensor2D {
    const { r, hidden: H, u } = this.config;
    const B = x.shape[0];
    // Every encoder input projection in a single matmul, then the recurrence.
    const zAll = tf
      .matMul(x.reshape([B * r, this.k]), this.v("encWx") as unknown as tf.Tensor2D)
      .reshape([B, r, 4 * H]);
    let h = tf.zeros([B, H]) as tf.Tensor2D;
    let c = tf.zeros([B, H]) as tf.Tensor2D;
    for (let t = 0; t < r; t++) {
      const zx = zAll.slice([0, t, 0], [-1, 1, -1]).reshape([B, 4 * H]) as tf.Tensor2D;
      [h, c] = EdLstm.step(zx, h, c, this.v("encWh"), this.v("encB"));
    }
    // The decoder starts from the last observed interval maximum and then
    // feeds each prediction back in as the next step's input.
    let inp = x
      .slice([0, r - 1, 0], [-1, 1, -1])
      .reshape([B, this.k])
      .max(1, true) as tf.Tensor2D;
    const outs: tf.Tensor2D[] = [];
    for (let j = 0; j < u; j++) {
      const zx = tf.matMul(inp, this.v("decWx") as unknown as tf.Tensor2D) as tf.Tensor2D;
      [h, c] = EdLstm.step(zx, h, c, this.v("decWh"), this.v("decB"));
      const y = tf.add(
        tf.matMul(h, this.v("headW") as unknown as tf.Tensor2D),
        this.v("headB"),
      ) as tf.Tensor2D;
      outs.push(y);
      inp = y;
    }
    return tf.concat(outs, 1) as tf.Tensor2D;
  }

  /** Normalize one raw input window (k*rDataset values, slicing the last
   * k*r if the dataset was exported with a longer window), predict, and
   * return u denormalized values clamped at zero. */
  predictOne(rawInputs: ArrayLike<number>): number[] {
    const { r, u } = this.config;
    const need = this.k * r;
    if (rawInputs.length < need) {
      throw new Error(`window has ${rawInputs.length} samples; model needs ${need}`);
    }
    const x = new Float32Array(need);
    for (let i = 0; i < need; i++) {
      x[i] = normalize(rawInputs[rawInputs.length - need + i], this.bounds);
    }
    const out = tf.tidy(() => this.forward(tf.tensor3d(x, [1, r, this.k])));
    const values = out.dataSync();
    out.dispose();
    const result: number[] = [];
    for (let j = 0; j < u; j++) {
      result.push(Math.max(0, denormalize(values[j], this.bounds)));
    }
    return result;
  }

  /** Copy out every weight (for best-epoch snapshots and persistence). */
  weightData(): Map<string, Float32Array> {
    const out = new Map<string, Float32Array>();
    for (const [name, variable] of this.vars) {
      out.set(name, new Float32Array(variable.dataSync() as Float32Array));
    }
    return out;
  }

  /** Overwrite weights from a snapshot produced by weightData(). */
  loadWeightData(data: Map<string, Float32Array>): void {
    for (const [name, variable] of this.vars) {
      const values = data.get(name);
      if (!values) throw new Error(`snapshot is missing weight ${name}`);
      const next = tf.tensor2d(values, variable.shape as [number, number]);
      variable.assign(next);
      next.dispose();
    }
  }

  dispose(): void {
    for (const variable of this.vars.values()) variable.dispose();
    this.vars.clear();
  }

  toJSON(): SerializedModel {
    const weights: Record<string, { shape: [number, number]; data: string }> = {};
    for (const [name, variable] of this.vars) {
      const values = new Float32Array(variable.dataSync() as Float32Array);
      weights[name] = {
        shape: variable.shape as [number, number],
        data: Buffer.from(values.buffer, values.byteOffset, values.byteLength).toString("base64"),
      };
    }
    return { config: this.config, k: this.k, bounds: this.bounds, weights };
  }

  static fromJSON(blob: SerializedModel): EdLstm {
    const model = new EdLstm(blob.config, blob.k, blob.bounds, 0);
    const data = new Map<string, Float32Array>();
    for (const [name, w] of Object.entries(blob.weights)) {
      const buf = Buffer.from(w.data, "base64");
      data.set(name, new Float32Array(buf.buffer, buf.byteOffset, buf.byteLength / 4));
    }
    model.loadWeightData(data);
    return model;
  }
}

export interface SerializedModel {
  config: ModelConfig;
  k: number;
  bounds: MinMax;
  weights: Record<string, { shape: [number, number]; data: string }>;
}

/** Elementwise Huber loss, mean-reduced; quadratic within delta of zero. */
export function huberLoss(yTrue: tf.Tensor, yPred: tf.Tensor, delta: number): tf.Scalar {
  const err = tf.abs(tf.sub(yTrue, yPred));
  const quad = tf.minimum(err, delta);
  const lin = tf.sub(err, quad);
  return tf.mean(tf.add(tf.mul(0.5, tf.square(quad)), tf.mul(delta, lin))) as tf.Scalar;
}

export function mseLoss(yTrue: tf.Tensor, yPred: tf.Tensor): tf.Scalar {
  return tf.mean(tf.square(tf.sub(yTrue, yPred))) as tf.Scalar;
}
