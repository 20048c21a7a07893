/** Per-dataset min-max normalization to [0, 1].
 *
 * Bounds come from the training split only, so held-out losses are honest;
 * a constant series normalizes to 0 with span 1 (no division blow-up).
 */

export interface MinMax {
  min: number;
  max: number;
}

export function fitMinMax(arrays: Iterable<ArrayLike<number>>): MinMax {
  let min = Infinity;
  let max = -Infinity;
  for (const arr of arrays) {
    for (let i = 0; i < arr.length; i++) {
      const v = arr[i];
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  if (!Number.isFinite(min) || !Number.isFinite(max)) {
    throw new Error("cannot fit normalization bounds on empty data");
  }
  return { min, max };
}

function span(b: MinMax): number {
  return b.max > b.min ? b.max - b.min : 1;
}

export function normalize(v: number, b: MinMax): number {
  return (v - b.min) / span(b);
}

export function denormalize(v: number, b: MinMax): number {
  return v * span(b) + b.min;
}

export function normalizeInto(src: ArrayLike<number>, dst: Float32Array, offset: number, b: MinMax): void {
  const s = span(b);
  for (let i = 0; i < src.length; i++) {
    dst[offset + i] = (src[i] - b.min) / s;
  }
}
