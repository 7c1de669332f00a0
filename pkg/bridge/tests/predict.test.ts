import { spawnSync } from "node:child_process";
import { readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { BridgeError } from "../src/errors.js";
import { LABELS, parseWindows } from "../src/formats.js";
import { fineTune } from "../src/fineTune.js";
import { loadCheckpoint, predict } from "../src/predict.js";
import { mulberry32, shuffled } from "../src/prng.js";
import { fixture, nonBlankLines, readFixture, tempDir } from "./helpers.js";

let workDir: string;
let cleanup: () => void;
let checkpointPath: string;

beforeAll(() => {
  ({ dir: workDir, cleanup } = tempDir());
  const result = fineTune({
    trainFile: fixture("train30.jsonl"),
    validationFile: fixture("val9.jsonl"),
    outDir: join(workDir, "model"),
    config: { seed: 7, maxEpochs: 20 },
  });
  checkpointPath = result.checkpointPath;
});

afterAll(() => cleanup());

describe("prediction output", () => {
  it("writes one well-formed line per window", () => {
    const outFile = join(workDir, "preds.jsonl");
    const { written } = predict({
      checkpointFile: checkpointPath,
      windowsFile: fixture("windows.jsonl"),
      outFile,
    });
    expect(written).toBe(20);
    const lines = nonBlankLines(readFileSync(outFile, "utf-8"));
    expect(lines).toHaveLength(20);
    for (const line of lines) {
      const rec = JSON.parse(line) as { mention_id: string; label: string; confidence: number };
      expect(Object.keys(JSON.parse(line) as object)).toEqual([
        "confidence",
        "label",
        "mention_id",
      ]);
      expect(LABELS).toContain(rec.label);
      expect(rec.confidence).toBeGreaterThanOrEqual(0);
      expect(rec.confidence).toBeLessThanOrEqual(1);
    }
  });

  it("preserves the input order even when windows arrive unsorted", () => {
    const windows = parseWindows(readFixture("windows.jsonl"));
    const scrambled = shuffled(windows, mulberry32(99));
    expect(scrambled.map((w) => w.mention_id)).not.toEqual(windows.map((w) => w.mention_id));

    const windowsFile = join(workDir, "scrambled.jsonl");
    writeFileSync(
      windowsFile,
      scrambled
        .map((w) => JSON.stringify({ masked_text: w.masked_text, mention_id: w.mention_id }) + "\n")
        .join(""),
    );
    const outFile = join(workDir, "scrambled-preds.jsonl");
    predict({ checkpointFile: checkpointPath, windowsFile, outFile });

    const got = nonBlankLines(readFileSync(outFile, "utf-8")).map(
      (line) => (JSON.parse(line) as { mention_id: string }).mention_id,
    );
    expect(got).toEqual(scrambled.map((w) => w.mention_id));
  });

  it("treats an empty windows file as a successful empty run", () => {
    const windowsFile = join(workDir, "empty.jsonl");
    writeFileSync(windowsFile, "");
    const outFile = join(workDir, "empty-preds.jsonl");
    const { written } = predict({ checkpointFile: checkpointPath, windowsFile, outFile });
    expect(written).toBe(0);
    expect(readFileSync(outFile, "utf-8")).toBe("");
  });

  it("is deterministic across calls", () => {
    const a = join(workDir, "a.jsonl");
    const b = join(workDir, "b.jsonl");
    predict({ checkpointFile: checkpointPath, windowsFile: fixture("windows.jsonl"), outFile: a });
    predict({ checkpointFile: checkpointPath, windowsFile: fixture("windows.jsonl"), outFile: b });
    expect(readFileSync(a, "utf-8")).toBe(readFileSync(b, "utf-8"));
  });
});

describe("round trip into the core", () => {
  it("produces predictions the core ingest command accepts end to end", () => {
    const predictionsFile = join(workDir, "roundtrip-preds.jsonl");
    predict({
      checkpointFile: checkpointPath,
      windowsFile: fixture("windows.jsonl"),
      outFile: predictionsFile,
    });

    const proc = spawnSync(
      "trdsent",
      [
        "ingest-predictions",
        "--predictions",
        predictionsFile,
        "--mentions",
        fixture("mentions.tsv"),
        "--out",
        join(workDir, "labeled.tsv"),
        "--source",
        "external",
      ],
      { encoding: "utf-8" },
    );
    expect(proc.stderr).toBe("");
    expect(proc.status).toBe(0);
    expect(proc.stdout).toContain("joined 20 predictions");

    const labeled = readFileSync(join(workDir, "labeled.tsv"), "utf-8");
    expect(nonBlankLines(labeled)).toHaveLength(21); // header + one row per window
  });
});

describe("checkpoint validation", () => {
  it("rejects a checkpoint that is not JSON", () => {
    const path = join(workDir, "garbage.json");
    writeFileSync(path, "not json");
    try {
      loadCheckpoint(path);
      expect.unreachable();
    } catch (err) {
      expect((err as BridgeError).kind).toBe("bad-checkpoint");
    }
  });

  it("rejects a checkpoint with inconsistent weight shape", () => {
    const checkpoint = JSON.parse(readFileSync(checkpointPath, "utf-8")) as {
      weights: number[][];
    };
    checkpoint.weights[1] = checkpoint.weights[1]!.slice(0, 10);
    const path = join(workDir, "bad-shape.json");
    writeFileSync(path, JSON.stringify(checkpoint));
    expect(() => loadCheckpoint(path)).toThrowError(/weights must be/);
  });

  it("rejects a checkpoint built for a different feature width", () => {
    const checkpoint = JSON.parse(readFileSync(checkpointPath, "utf-8")) as {
      featureDim: number;
      weights: number[][];
    };
    checkpoint.featureDim = 64;
    checkpoint.weights = checkpoint.weights.map((row) => row.slice(0, 65));
    const path = join(workDir, "wrong-width.json");
    writeFileSync(path, JSON.stringify(checkpoint));
    try {
      loadCheckpoint(path);
      expect.unreachable();
    } catch (err) {
      expect((err as BridgeError).kind).toBe("checkpoint-mismatch");
    }
  });
});
