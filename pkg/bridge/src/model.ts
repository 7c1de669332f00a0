/**
 * Multinomial logistic regression over hashed window features.
 *
 * Deliberately small and fully deterministic: seeded init, seeded epoch
 * shuffles, plain gradient descent with a decaying learning rate, and
 * early stopping on validation loss. The training contract under test
 * is reproducibility and file-format fidelity, not leaderboard accuracy.
 */
import { z } from "zod";

import { BridgeError } from "./errors.js";
import { FEATURE_DIM, featurize } from "./features.js";
import { LABELS, type Label, type TrainInstance } from "./formats.js";
import type { TrainingConfig } from "./config.js";
import { gaussian, mulberry32, shuffled } from "./prng.js";

export interface EpochMetrics {
  epoch: number;
  learningRate: number;
  trainLoss: number;
  validationLoss: number;
  validationAccuracy: number;
}

export interface TrainResult {
  weights: number[][]; // LABELS.length rows x (FEATURE_DIM + 1) columns
  epochs: EpochMetrics[];
  bestEpoch: number;
  stoppedEarly: boolean;
  /** Training order of the first epoch, as mention ids. */
  firstEpochOrder: string[];
}

export const checkpointSchema = z.object({
  format: z.literal("trdsent-bridge-checkpoint"),
  version: z.literal(1),
  baseModel: z.string(),
  labels: z.tuple([z.literal("Negative"), z.literal("Neutral"), z.literal("Positive")]),
  featureDim: z.number().int().positive(),
  maxSequenceLength: z.number().int().positive(),
  placeholderToken: z.string().min(1),
  weights: z.array(z.array(z.number())),
});
export type Checkpoint = z.infer<typeof checkpointSchema>;

export function parseCheckpoint(raw: unknown): Checkpoint {
  const parsed = checkpointSchema.safeParse(raw);
  if (!parsed.success) {
    const issue = parsed.error.issues[0];
    const where = issue && issue.path.length > 0 ? `${issue.path.join(".")}: ` : "";
    throw new BridgeError(
      "bad-checkpoint",
      `${where}${issue ? issue.message : "invalid checkpoint"}`,
    );
  }
  const cp = parsed.data;
  const cols = cp.featureDim + 1;
  if (cp.weights.length !== cp.labels.length || cp.weights.some((row) => row.length !== cols)) {
    throw new BridgeError(
      "bad-checkpoint",
      `weights must be ${cp.labels.length} x ${cols}, got ` +
        `${cp.weights.length} x ${cp.weights[0]?.length ?? 0}`,
    );
  }
  return cp;
}

function softmax(logits: Float64Array): Float64Array {
  let max = -Infinity;
  for (const v of logits) max = Math.max(max, v);
  const exps = new Float64Array(logits.length);
  let sum = 0;
  for (let i = 0; i < logits.length; i++) {
    exps[i] = Math.exp(logits[i]! - max);
    sum += exps[i]!;
  }
  for (let i = 0; i < logits.length; i++) exps[i]! /= sum;
  return exps;
}

function logits(weights: Float64Array[], x: Float64Array): Float64Array {
  const out = new Float64Array(weights.length);
  for (let c = 0; c < weights.length; c++) {
    const row = weights[c]!;
    let dot = 0;
    for (let j = 0; j < x.length; j++) dot += row[j]! * x[j]!;
    out[c] = dot;
  }
  return out;
}

/** Class probabilities for one featurized window. */
export function predictProba(weights: Float64Array[], x: Float64Array): Float64Array {
  return softmax(logits(weights, x));
}

interface Example {
  mentionId: string;
  x: Float64Array;
  y: number;
}

function prepare(instances: readonly TrainInstance[], config: TrainingConfig): Example[] {
  return instances.map((inst) => ({
    mentionId: inst.mention_id,
    x: featurize(inst.masked_text, config.placeholderToken, config.maxSequenceLength),
    y: LABELS.indexOf(inst.label),
  }));
}

function meanLossAndAccuracy(
  weights: Float64Array[],
  examples: readonly Example[],
): { loss: number; accuracy: number } {
  if (examples.length === 0) return { loss: 0, accuracy: 0 };
  let loss = 0;
  let correct = 0;
  for (const ex of examples) {
    const p = predictProba(weights, ex.x);
    loss += -Math.log(Math.max(p[ex.y]!, 1e-12));
    let argmax = 0;
    for (let c = 1; c < p.length; c++) if (p[c]! > p[argmax]!) argmax = c;
    if (argmax === ex.y) correct += 1;
  }
  return { loss: loss / examples.length, accuracy: correct / examples.length };
}

/**
 * Train on `train`, early-stopping on `validation` loss, and return the
 * best-epoch weights plus per-epoch metrics.
 */
export function train(
  trainSet: readonly TrainInstance[],
  validationSet: readonly TrainInstance[],
  config: TrainingConfig,
): TrainResult {
  const rng = mulberry32(config.seed);
  const cols = FEATURE_DIM + 1;
  const weights: Float64Array[] = LABELS.map(() => {
    const row = new Float64Array(cols);
    for (let j = 0; j < cols; j++) row[j] = 0.01 * gaussian(rng);
    return row;
  });

  const trainExamples = prepare(trainSet, config);
  const validationExamples = prepare(validationSet, config);

  const epochs: EpochMetrics[] = [];
  let best: Float64Array[] = weights.map((row) => row.slice());
  let bestEpoch = 0;
  let bestValidationLoss = Infinity;
  let sinceImprovement = 0;
  let stoppedEarly = false;
  let firstEpochOrder: string[] = [];

  for (let epoch = 0; epoch < config.maxEpochs; epoch++) {
    const lr = config.learningRate.initial * Math.pow(config.learningRate.decay, epoch);
    const order = shuffled(trainExamples, rng);
    if (epoch === 0) firstEpochOrder = order.map((ex) => ex.mentionId);

    for (const ex of order) {
      const p = predictProba(weights, ex.x);
      for (let c = 0; c < weights.length; c++) {
        const gradScale = p[c]! - (c === ex.y ? 1 : 0);
        if (gradScale === 0) continue;
        const row = weights[c]!;
        const step = lr * gradScale;
        for (let j = 0; j < cols; j++) row[j]! -= step * ex.x[j]!;
      }
    }

    const trainEval = meanLossAndAccuracy(weights, trainExamples);
    const valEval = meanLossAndAccuracy(weights, validationExamples);
    epochs.push({
      epoch: epoch + 1,
      learningRate: lr,
      trainLoss: trainEval.loss,
      validationLoss: valEval.loss,
      validationAccuracy: valEval.accuracy,
    });

    if (valEval.loss < bestValidationLoss - 1e-9) {
      bestValidationLoss = valEval.loss;
      best = weights.map((row) => row.slice());
      bestEpoch = epoch + 1;
      sinceImprovement = 0;
    } else {
      sinceImprovement += 1;
      if (sinceImprovement >= config.earlyStoppingPatience) {
        stoppedEarly = true;
        break;
      }
    }
  }

  return {
    weights: best.map((row) => Array.from(row)),
    epochs,
    bestEpoch,
    stoppedEarly,
    firstEpochOrder,
  };
}

/** Argmax label and its probability for one window. */
export function classify(
  checkpoint: Checkpoint,
  maskedText: string,
): { label: Label; confidence: number } {
  const weights = checkpoint.weights.map((row) => Float64Array.from(row));
  const x = featurize(maskedText, checkpoint.placeholderToken, checkpoint.maxSequenceLength);
  const p = predictProba(weights, x);
  let argmax = 0;
  for (let c = 1; c < p.length; c++) if (p[c]! > p[argmax]!) argmax = c;
  return { label: LABELS[argmax]!, confidence: p[argmax]! };
}
