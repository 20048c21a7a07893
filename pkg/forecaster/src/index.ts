export { initBackend, backendName } from "./backend.js";
export {
  ConnDataset,
  DatasetError,
  Manifest,
  TrainingWindow,
  loadConnDataset,
  loadDataset,
  loadManifest,
  seriesLength,
} from "./dataset.js";
export { EmitResult, StepPredictor, emitPredictions } from "./emit.js";
export {
  GridOptions,
  GridResult,
  TrainFn,
  defaultGridOptions,
  enumerateConfigs,
  gridSearch,
} from "./grid.js";
export {
  ConfigGrid,
  EdLstm,
  ModelConfig,
  SerializedModel,
  defaultConfig,
  fullGrid,
  huberLoss,
  mseLoss,
  smokeGrid,
} from "./model.js";
export { MinMax, denormalize, fitMinMax, normalize, normalizeInto } from "./normalize.js";
export { deriveSeed, mulberry32, shuffle, uniform } from "./rng.js";
export {
  DEFAULT_STOP_PATIENCE,
  EpochStat,
  LossKind,
  SplitWindows,
  TrainOptions,
  TrainOutcome,
  TrainReport,
  chronologicalSplit,
  modelMse,
  persistenceMse,
  trainModel,
} from "./train.js";
