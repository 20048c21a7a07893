/** Compute backend selection: WASM when it initializes, plain CPU otherwise.
 *
 * The WASM kernels are several times faster than the pure-JS backend for
 * the matmul-heavy training loop.  EONPLAN_FORECAST_BACKEND=cpu forces the
 * fallback (the analogue of the planner's EONPLAN_KERNELS=pure).
 */

import { createRequire } from "node:module";
import * as path from "node:path";

import * as tf from "@tensorflow/tfjs";
import wasm from "@tensorflow/tfjs-backend-wasm";

let selected: string | null = null;

export async function initBackend(): Promise<string> {
  if (selected !== null) return selected;
  const forced = (process.env["EONPLAN_FORECAST_BACKEND"] ?? "").toLowerCase();
  if (forced !== "cpu") {
    try {
      const require = createRequire(import.meta.url);
      const dist = path.dirname(require.resolve("@tensorflow/tfjs-backend-wasm"));
      wasm.setWasmPaths(dist + path.sep);
      if (await tf.setBackend("wasm")) {
        await tf.ready();
        selected = "wasm";
        return selected;
      }
    } catch {
      // fall through to the pure-JS backend
    }
  }
  await tf.setBackend("cpu");
  await tf.ready();
  selected = "cpu";
  return selected;
}

export function backendName(): string | null {
  return selected;
}
