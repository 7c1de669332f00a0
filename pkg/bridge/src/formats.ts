/**
 * File formats at the bridge boundary.
 *
 * Every file the bridge reads or writes is owned by the core pipeline:
 * masked-window JSONL, prediction JSONL, the windows+labels train format,
 * and augmentation-prompt JSONL. Schemas here are the single source of
 * truth for what the bridge accepts, and parse errors carry the line
 * number so a bad row in a 100k-line file is findable.
 */
import { z } from "zod";

import { BridgeError } from "./errors.js";

/** Placeholder the core substitutes for the medication surface. */
export const PLACEHOLDER = "<MEDICATION>";

/** Sentiment labels in the core's canonical order. */
export const LABELS = ["Negative", "Neutral", "Positive"] as const;
export type Label = (typeof LABELS)[number];

export const labelSchema = z.enum(LABELS);

export const windowSchema = z.object({
  mention_id: z.string().min(1),
  masked_text: z.string(),
});
export type WindowRecord = z.infer<typeof windowSchema>;

export const predictionSchema = z.object({
  mention_id: z.string().min(1),
  label: labelSchema,
  confidence: z.number().min(0).max(1),
});
export type PredictionRecord = z.infer<typeof predictionSchema>;

/** One row of the windows+labels train format. */
export const trainInstanceSchema = z.object({
  mention_id: z.string().min(1),
  masked_text: z.string(),
  label: labelSchema,
});
export type TrainInstance = z.infer<typeof trainInstanceSchema>;

/** One row of the core's augmentation-prompt file. */
export const promptSchema = z.object({
  mention_id: z.string().min(1),
  label: labelSchema,
  prompt: z.string().min(1),
});
export type PromptRecord = z.infer<typeof promptSchema>;

function parseJsonl<T>(text: string, schema: z.ZodType<T>, what: string): T[] {
  const out: T[] = [];
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i]!;
    if (line.trim() === "") continue;
    let raw: unknown;
    try {
      raw = JSON.parse(line);
    } catch {
      throw new BridgeError("bad-jsonl", `${what} line ${i + 1}: not valid JSON`);
    }
    const parsed = schema.safeParse(raw);
    if (!parsed.success) {
      const issue = parsed.error.issues[0];
      const where = issue && issue.path.length > 0 ? ` field '${issue.path.join(".")}'` : "";
      const detail = issue ? issue.message : "invalid record";
      throw new BridgeError("bad-record", `${what} line ${i + 1}${where}: ${detail}`);
    }
    out.push(parsed.data);
  }
  return out;
}

export function parseWindows(text: string): WindowRecord[] {
  return parseJsonl(text, windowSchema, "windows");
}

export function parseTrainFile(text: string): TrainInstance[] {
  return parseJsonl(text, trainInstanceSchema, "train file");
}

export function parsePrompts(text: string): PromptRecord[] {
  return parseJsonl(text, promptSchema, "prompts");
}

/** Serialize prediction records one JSON object per line, keys sorted. */
export function formatPredictions(records: readonly PredictionRecord[]): string {
  return records
    .map((r) =>
      JSON.stringify({ confidence: r.confidence, label: r.label, mention_id: r.mention_id }),
    )
    .map((line) => line + "\n")
    .join("");
}

/** Serialize train instances one JSON object per line, keys sorted. */
export function formatTrainFile(records: readonly TrainInstance[]): string {
  return records
    .map((r) =>
      JSON.stringify({ label: r.label, masked_text: r.masked_text, mention_id: r.mention_id }),
    )
    .map((line) => line + "\n")
    .join("");
}
