/**
 * Synthetic training-data generation driven by the core's prompt files.
 *
 * Each non-neutral prompt asks an endpoint for exactly k paraphrased
 * posts about the same target surface with the same sentiment. Replies
 * violating that contract (wrong line count, blank line, or a line that
 * never mentions the target) are retried and, if still bad, reported in
 * the audit rather than silently dropped. Accepted variants are masked
 * back into the core's windows+labels train format, and the audit's
 * arithmetic mirrors the core's augmentation bookkeeping.
 */
import { readFileSync, writeFileSync } from "node:fs";

import { BridgeError } from "./errors.js";
import {
  PLACEHOLDER,
  formatTrainFile,
  parsePrompts,
  parseTrainFile,
  type PromptRecord,
  type TrainInstance,
} from "./formats.js";
import { fnv1a32 } from "./prng.js";

/** A text-generation endpoint: k variant posts for one prompt. */
export interface Endpoint {
  generate(prompt: string, k: number): Promise<string[]>;
}

const SURFACE_RE = /The target therapy in this post is "([^"\n]+)"/;

/** Target surface quoted inside a core augmentation prompt. */
export function extractSurface(prompt: string): string {
  const match = SURFACE_RE.exec(prompt);
  if (!match) {
    throw new BridgeError("prompt-format", "prompt does not name a target surface");
  }
  return match[1]!;
}

/** First reason this reply violates the k-variant contract, or null. */
export function variantViolation(lines: readonly string[], k: number, surface: string): string | null {
  if (lines.length !== k) {
    return `expected ${k} variants, got ${lines.length}`;
  }
  const needle = surface.toLowerCase();
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i]!;
    if (line.trim() === "") return `variant ${i + 1} is blank`;
    if (line.includes("\n")) return `variant ${i + 1} spans multiple lines`;
    if (!line.toLowerCase().includes(needle)) {
      return `variant ${i + 1} does not mention ${JSON.stringify(surface)}`;
    }
  }
  return null;
}

/** Replace the first case-insensitive occurrence of `surface` with the placeholder. */
export function maskSurface(text: string, surface: string): string {
  const at = text.toLowerCase().indexOf(surface.toLowerCase());
  if (at < 0) {
    throw new BridgeError("mask-failed", `text does not contain ${JSON.stringify(surface)}`);
  }
  return text.slice(0, at) + PLACEHOLDER + text.slice(at + surface.length);
}

const NEGATIVE_TEMPLATES = [
  "i gave {s} a fair shot for two months and it did absolutely nothing for me",
  "{s} made me feel flat and exhausted, had to come off it",
  "honestly {s} was the worst one i tried, the side effects were brutal",
  "my doctor pushed {s} hard but it just made everything worse",
  "quit {s} last week after the headaches became unbearable",
  "zero improvement on {s} and i gained so much weight",
  "{s} wrecked my sleep, never again",
  "three weeks on {s} and i felt more hopeless than before",
] as const;

const POSITIVE_TEMPLATES = [
  "{s} genuinely gave me my life back after years of nothing working",
  "six weeks on {s} and i finally feel like myself again",
  "cannot overstate how much {s} helped once the dose settled",
  "{s} was the first thing that actually lifted the fog",
  "so glad my psychiatrist suggested {s}, huge difference",
  "{s} turned things around for me within a month",
  "the change since starting {s} has been night and day",
  "if you are on the fence about {s}, it was absolutely worth it for me",
] as const;

/**
 * Deterministic offline endpoint: paraphrase templates keyed by the
 * prompt's surface and sentiment. Stateless, so concurrent calls are
 * reproducible regardless of scheduling.
 */
export class TemplateEndpoint implements Endpoint {
  async generate(prompt: string, k: number): Promise<string[]> {
    const surface = extractSurface(prompt);
    const positive = / sentiment toward it is Positive\./.test(prompt);
    const pool = positive ? POSITIVE_TEMPLATES : NEGATIVE_TEMPLATES;
    const start = fnv1a32(surface + (positive ? "+" : "-")) % pool.length;
    const lines: string[] = [];
    for (let i = 0; i < k; i++) {
      const template = pool[(start + i) % pool.length]!;
      const lap = Math.floor(i / pool.length);
      const emphasis = lap > 0 ? " really".repeat(lap).trimStart() + " " : "";
      lines.push(emphasis + template.replaceAll("{s}", surface));
    }
    return lines;
  }
}

export interface SyntheticAudit {
  k: number;
  original: { negative: number; neutral: number; positive: number; total: number };
  expectedSynthetic: { negative: number; positive: number; total: number };
  expectedAfterAugmentation: {
    negative: number;
    neutral: number;
    positive: number;
    total: number;
  };
  written: { negative: number; positive: number; total: number };
  retried: { mention_id: string; attempts: number }[];
  failed: { mention_id: string; attempts: number; reason: string }[];
}

export interface GenerateSyntheticOptions {
  /** Original windows+labels train file, for the audit's bookkeeping. */
  instancesFile: string;
  /** Core augmentation-prompt JSONL. */
  promptsFile: string;
  outFile: string;
  auditFile: string;
  endpoint: Endpoint;
  /** Variants requested per instance. */
  k?: number;
  /** Total attempts per instance, including the first. */
  maxAttempts?: number;
}

interface InstanceOutcome {
  instances: TrainInstance[];
  attempts: number;
  failure: string | null;
}

async function generateForPrompt(
  record: PromptRecord,
  endpoint: Endpoint,
  k: number,
  maxAttempts: number,
): Promise<InstanceOutcome> {
  const surface = extractSurface(record.prompt);
  let lastReason = "no attempts made";
  for (let attempt = 1; attempt <= maxAttempts; attempt++) {
    const lines = await endpoint.generate(record.prompt, k);
    const violation = variantViolation(lines, k, surface);
    if (violation === null) {
      const instances = lines.map((line, i) => ({
        mention_id: `${record.mention_id}#s${i + 1}`,
        masked_text: maskSurface(line, surface),
        label: record.label,
      }));
      return { instances, attempts: attempt, failure: null };
    }
    lastReason = violation;
  }
  return { instances: [], attempts: maxAttempts, failure: lastReason };
}

export async function generateSynthetic(
  options: GenerateSyntheticOptions,
): Promise<SyntheticAudit> {
  const k = options.k ?? 5;
  const maxAttempts = options.maxAttempts ?? 3;
  if (k < 1) throw new BridgeError("bad-config", "k must be >= 1");
  if (maxAttempts < 1) throw new BridgeError("bad-config", "maxAttempts must be >= 1");

  const instances = parseTrainFile(readFileSync(options.instancesFile, "utf-8"));
  const prompts = parsePrompts(readFileSync(options.promptsFile, "utf-8"));

  const original = { negative: 0, neutral: 0, positive: 0, total: instances.length };
  const byId = new Map<string, TrainInstance>();
  for (const inst of instances) {
    if (inst.label === "Negative") original.negative += 1;
    else if (inst.label === "Neutral") original.neutral += 1;
    else original.positive += 1;
    byId.set(inst.mention_id, inst);
  }

  for (const record of prompts) {
    if (record.label === "Neutral") {
      throw new BridgeError(
        "neutral-not-augmented",
        `prompt for ${record.mention_id} is labeled Neutral; neutral instances are never augmented`,
      );
    }
    const source = byId.get(record.mention_id);
    if (!source) {
      throw new BridgeError(
        "unknown-instance",
        `prompt for ${record.mention_id} has no matching train instance`,
      );
    }
    if (source.label !== record.label) {
      throw new BridgeError(
        "label-mismatch",
        `prompt for ${record.mention_id} is ${record.label} but the instance is ${source.label}`,
      );
    }
  }
  const nonNeutral = original.negative + original.positive;
  if (prompts.length !== nonNeutral) {
    throw new BridgeError(
      "prompt-coverage",
      `expected one prompt per non-neutral instance (${nonNeutral}), got ${prompts.length}`,
    );
  }

  const outcomes = await Promise.all(
    prompts.map((record) => generateForPrompt(record, options.endpoint, k, maxAttempts)),
  );

  const synthetic: TrainInstance[] = [];
  const written = { negative: 0, positive: 0, total: 0 };
  const retried: SyntheticAudit["retried"] = [];
  const failed: SyntheticAudit["failed"] = [];
  for (let i = 0; i < prompts.length; i++) {
    const record = prompts[i]!;
    const outcome = outcomes[i]!;
    if (outcome.failure !== null) {
      failed.push({ mention_id: record.mention_id, attempts: outcome.attempts, reason: outcome.failure });
      continue;
    }
    if (outcome.attempts > 1) {
      retried.push({ mention_id: record.mention_id, attempts: outcome.attempts });
    }
    synthetic.push(...outcome.instances);
    if (record.label === "Negative") written.negative += k;
    else written.positive += k;
    written.total += k;
  }

  const audit: SyntheticAudit = {
    k,
    original,
    expectedSynthetic: {
      negative: original.negative * k,
      positive: original.positive * k,
      total: nonNeutral * k,
    },
    expectedAfterAugmentation: {
      negative: original.negative * (1 + k),
      neutral: original.neutral,
      positive: original.positive * (1 + k),
      total: original.negative * (1 + k) + original.neutral + original.positive * (1 + k),
    },
    written,
    retried,
    failed,
  };

  writeFileSync(options.outFile, formatTrainFile(synthetic));
  writeFileSync(options.auditFile, JSON.stringify(audit, null, 2) + "\n");
  return audit;
}
