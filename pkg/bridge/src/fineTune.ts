/**
 * Fine-tune entry point: windows+labels train file in, checkpoint and
 * run metadata out.
 *
 * Hard validation happens before any training: the placeholder token is
 * checked against the core's, every row must parse against the label
 * schema, and every masked text must contain the placeholder. Runs with
 * the same seed shuffle identically, and the metadata records a hash of
 * that order so reruns are checkable at a glance.
 */
import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { loadConfig, type TrainingConfig } from "./config.js";
import { BridgeError } from "./errors.js";
import { FEATURE_DIM } from "./features.js";
import { parseTrainFile, type TrainInstance } from "./formats.js";
import { train, type Checkpoint, type EpochMetrics } from "./model.js";
import { fnv1a64 } from "./prng.js";

export interface FineTuneOptions {
  trainFile: string;
  /** Explicit held-out file for early stopping; never carved out implicitly. */
  validationFile: string;
  outDir: string;
  config?: unknown;
}

export interface RunMetadata {
  config: TrainingConfig;
  /** FNV-1a 64 over the first-epoch training order of mention ids. */
  dataOrderHash: string;
  counts: {
    train: { negative: number; neutral: number; positive: number; total: number };
    validation: { negative: number; neutral: number; positive: number; total: number };
  };
  epochs: EpochMetrics[];
  bestEpoch: number;
  stoppedEarly: boolean;
}

export interface FineTuneResult {
  checkpointPath: string;
  metadataPath: string;
  metadata: RunMetadata;
}

function labelCounts(instances: readonly TrainInstance[]) {
  const counts = { negative: 0, neutral: 0, positive: 0, total: instances.length };
  for (const inst of instances) {
    if (inst.label === "Negative") counts.negative += 1;
    else if (inst.label === "Neutral") counts.neutral += 1;
    else counts.positive += 1;
  }
  return counts;
}

/** Reject any instance whose masked text lacks the placeholder. */
export function assertPlaceholderPresent(
  instances: readonly TrainInstance[],
  placeholder: string,
  what: string,
): void {
  for (const inst of instances) {
    if (!inst.masked_text.includes(placeholder)) {
      throw new BridgeError(
        "placeholder-missing",
        `${what} instance ${inst.mention_id} does not contain ${JSON.stringify(placeholder)}`,
      );
    }
  }
}

export function fineTune(options: FineTuneOptions): FineTuneResult {
  const config = loadConfig(options.config);

  const trainSet = parseTrainFile(readFileSync(options.trainFile, "utf-8"));
  const validationSet = parseTrainFile(readFileSync(options.validationFile, "utf-8"));
  if (trainSet.length === 0) {
    throw new BridgeError("empty-input", `no instances in ${options.trainFile}`);
  }
  if (validationSet.length === 0) {
    throw new BridgeError("empty-input", `no instances in ${options.validationFile}`);
  }
  assertPlaceholderPresent(trainSet, config.placeholderToken, "train");
  assertPlaceholderPresent(validationSet, config.placeholderToken, "validation");

  const result = train(trainSet, validationSet, config);

  const checkpoint: Checkpoint = {
    format: "trdsent-bridge-checkpoint",
    version: 1,
    baseModel: config.baseModel,
    labels: ["Negative", "Neutral", "Positive"],
    featureDim: FEATURE_DIM,
    maxSequenceLength: config.maxSequenceLength,
    placeholderToken: config.placeholderToken,
    weights: result.weights,
  };

  const metadata: RunMetadata = {
    config,
    dataOrderHash: fnv1a64(result.firstEpochOrder.join("\n")),
    counts: {
      train: labelCounts(trainSet),
      validation: labelCounts(validationSet),
    },
    epochs: result.epochs,
    bestEpoch: result.bestEpoch,
    stoppedEarly: result.stoppedEarly,
  };

  mkdirSync(options.outDir, { recursive: true });
  const checkpointPath = join(options.outDir, "checkpoint.json");
  const metadataPath = join(options.outDir, "metadata.json");
  writeFileSync(checkpointPath, JSON.stringify(checkpoint, null, 2) + "\n");
  writeFileSync(metadataPath, JSON.stringify(metadata, null, 2) + "\n");
  return { checkpointPath, metadataPath, metadata };
}
