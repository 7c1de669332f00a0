/**
 * Training configuration.
 *
 * The placeholder token the classifier treats as atomic must be the exact
 * string the core masks windows with; that equality is asserted the moment
 * a config is loaded, not when a mismatched token finally misses every
 * window at train time.
 */
import { z } from "zod";

import { BridgeError } from "./errors.js";
import { PLACEHOLDER } from "./formats.js";

export const trainingConfigSchema = z.object({
  /** Identifier of the base model this run fine-tunes. */
  baseModel: z.string().min(1).default("hashed-bow-softmax/512"),
  /** Learning-rate schedule: rate at epoch e is initial * decay^e. */
  learningRate: z
    .object({
      initial: z.number().positive(),
      decay: z.number().gt(0).max(1),
    })
    .default({ initial: 0.5, decay: 0.9 }),
  /** Stop after this many epochs without validation-loss improvement. */
  earlyStoppingPatience: z.number().int().min(1).default(3),
  /** Hard cap on training epochs. */
  maxEpochs: z.number().int().min(1).default(40),
  /** Token-stream truncation length per window. */
  maxSequenceLength: z.number().int().min(8).default(128),
  /** Seed for weight init and epoch shuffles. */
  seed: z.number().int().default(0),
  /** Placeholder token; must equal the core's masking placeholder. */
  placeholderToken: z.string().min(1).default(PLACEHOLDER),
});

export type TrainingConfig = z.infer<typeof trainingConfigSchema>;

/**
 * Validate a raw config object and assert placeholder compatibility
 * with the core. Call this at startup, before any data is read.
 */
export function loadConfig(raw: unknown): TrainingConfig {
  const parsed = trainingConfigSchema.safeParse(raw ?? {});
  if (!parsed.success) {
    const issue = parsed.error.issues[0];
    const where = issue && issue.path.length > 0 ? `${issue.path.join(".")}: ` : "";
    throw new BridgeError("bad-config", `${where}${issue ? issue.message : "invalid config"}`);
  }
  const config = parsed.data;
  if (config.placeholderToken !== PLACEHOLDER) {
    throw new BridgeError(
      "placeholder-mismatch",
      `config placeholder ${JSON.stringify(config.placeholderToken)} does not match ` +
        `the core's masking placeholder ${JSON.stringify(PLACEHOLDER)}`,
    );
  }
  return config;
}
