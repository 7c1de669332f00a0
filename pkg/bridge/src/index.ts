export { BridgeError, formatError } from "./errors.js";
export {
  LABELS,
  PLACEHOLDER,
  formatPredictions,
  formatTrainFile,
  parsePrompts,
  parseTrainFile,
  parseWindows,
  type Label,
  type PredictionRecord,
  type PromptRecord,
  type TrainInstance,
  type WindowRecord,
} from "./formats.js";
export { loadConfig, trainingConfigSchema, type TrainingConfig } from "./config.js";
export { FEATURE_DIM, featurize, tokenize } from "./features.js";
export {
  classify,
  parseCheckpoint,
  predictProba,
  train,
  type Checkpoint,
  type EpochMetrics,
  type TrainResult,
} from "./model.js";
export {
  assertPlaceholderPresent,
  fineTune,
  type FineTuneOptions,
  type FineTuneResult,
  type RunMetadata,
} from "./fineTune.js";
export { loadCheckpoint, predict, predictWindows, type PredictOptions } from "./predict.js";
export {
  TemplateEndpoint,
  extractSurface,
  generateSynthetic,
  maskSurface,
  variantViolation,
  type Endpoint,
  type GenerateSyntheticOptions,
  type SyntheticAudit,
} from "./synthetic.js";
export { fnv1a64, mulberry32, shuffled } from "./prng.js";
