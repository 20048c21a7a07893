/** Prediction CSV emission in the planner's ingestion format.
 *
 * Rows are `epoch,connection_id,step,gbps` with steps 1..u per (epoch,
 * connection).  Values stay in trace units — the planner applies the
 * scenario's demand scale on ingestion, exactly as it does for its own
 * fallback predictor — so no `prescaled` flag is written.
 */

import * as fs from "node:fs";

import { ConnDataset, seriesLength, TrainingWindow } from "./dataset.js";

export interface StepPredictor {
  predictOne(rawInputs: ArrayLike<number>): number[];
}

export interface EmitResult {
  path: string;
  rows: number;
  epochs: number;
  testStart: number;
}

/** Forecast every planning epoch of a t_test-interval horizon and write the
 * CSV.  Epoch e is predicted from the window whose last input interval is
 * `testStart + e*u - 1`, mirroring when the planner consults predictions. */
export function emitPredictions(
  models: Map<number, StepPredictor>,
  datasets: Map<number, ConnDataset>,
  tTest: number,
  outPath: string,
): EmitResult {
  if (datasets.size === 0) throw new Error("no datasets to predict from");
  if (tTest < 1) throw new Error(`t_test must be >= 1: ${tTest}`);
  const conns = [...datasets.keys()].sort((a, b) => a - b);
  const first = datasets.get(conns[0])!;
  const u = first.u;
  const T = seriesLength(first);
  for (const conn of conns) {
    const ds = datasets.get(conn)!;
    if (seriesLength(ds) !== T || ds.u !== u) {
      throw new Error(`connection ${conn}: window geometry disagrees with connection ${conns[0]}`);
    }
    if (!models.has(conn)) throw new Error(`no model for connection ${conn}`);
  }
  if (tTest > T) throw new Error(`t_test=${tTest} exceeds the ${T}-interval series`);
  const testStart = T - tTest;
  const numEpochs = Math.ceil(tTest / u);

  const byT = new Map<number, Map<number, TrainingWindow>>();
  for (const conn of conns) {
    const index = new Map<number, TrainingWindow>();
    for (const w of datasets.get(conn)!.windows) index.set(w.t, w);
    byT.set(conn, index);
  }

  const lines = ["epoch,connection_id,step,gbps"];
  for (let epoch = 0; epoch < numEpochs; epoch++) {
    const historyT = testStart + epoch * u - 1;
    for (const conn of conns) {
      const window = byT.get(conn)!.get(historyT);
      if (!window) {
        const ws = datasets.get(conn)!.windows;
        throw new Error(
          `epoch ${epoch} needs history through interval ${historyT}, but connection ` +
            `${conn} only has windows for t=${ws[0].t}..${ws[ws.length - 1].t}`,
        );
      }
      const values = models.get(conn)!.predictOne(window.inputs);
      if (values.length !== u) {
        throw new Error(`model for connection ${conn} emitted ${values.length} steps, not ${u}`);
      }
      for (let step = 1; step <= u; step++) {
        lines.push(`${epoch},${conn},${step},${String(values[step - 1])}`);
      }
    }
  }
  fs.writeFileSync(outPath, lines.join("\n") + "\n");
  return { path: outPath, rows: lines.length - 1, epochs: numEpochs, testStart };
}
