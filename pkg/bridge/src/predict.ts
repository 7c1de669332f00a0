/**
 * Batch prediction: masked-window JSONL in, prediction JSONL out.
 *
 * Output rows appear in the exact order of the input windows, one line
 * per window, each carrying the argmax label and its probability. An
 * empty windows file is a successful run producing an empty file.
 */
import { readFileSync, writeFileSync } from "node:fs";

import { BridgeError } from "./errors.js";
import { FEATURE_DIM } from "./features.js";
import {
  formatPredictions,
  parseWindows,
  type PredictionRecord,
  type WindowRecord,
} from "./formats.js";
import { classify, parseCheckpoint, type Checkpoint } from "./model.js";

export function loadCheckpoint(path: string): Checkpoint {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    if (err instanceof SyntaxError) {
      throw new BridgeError("bad-checkpoint", `${path}: not valid JSON`);
    }
    throw err;
  }
  const checkpoint = parseCheckpoint(raw);
  if (checkpoint.featureDim !== FEATURE_DIM) {
    throw new BridgeError(
      "checkpoint-mismatch",
      `checkpoint feature width ${checkpoint.featureDim} does not match this build (${FEATURE_DIM})`,
    );
  }
  return checkpoint;
}

/** Predictions for windows, preserving input order. */
export function predictWindows(
  checkpoint: Checkpoint,
  windows: readonly WindowRecord[],
): PredictionRecord[] {
  return windows.map((w) => {
    const scored = classify(checkpoint, w.masked_text);
    return { mention_id: w.mention_id, label: scored.label, confidence: scored.confidence };
  });
}

export interface PredictOptions {
  checkpointFile: string;
  windowsFile: string;
  outFile: string;
}

export function predict(options: PredictOptions): { written: number } {
  const checkpoint = loadCheckpoint(options.checkpointFile);
  const windows = parseWindows(readFileSync(options.windowsFile, "utf-8"));
  const predictions = predictWindows(checkpoint, windows);
  writeFileSync(options.outFile, formatPredictions(predictions));
  return { written: predictions.length };
}
