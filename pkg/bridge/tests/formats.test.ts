import { describe, expect, it } from "vitest";

import { BridgeError } from "../src/errors.js";
import {
  LABELS,
  PLACEHOLDER,
  formatPredictions,
  formatTrainFile,
  parsePrompts,
  parseTrainFile,
  parseWindows,
} from "../src/formats.js";
import { nonBlankLines, readFixture } from "./helpers.js";

describe("window parsing", () => {
  it("round-trips the core window fixture", () => {
    const windows = parseWindows(readFixture("windows.jsonl"));
    expect(windows).toHaveLength(20);
    for (const w of windows) {
      expect(w.mention_id).toMatch(/^b\d\d:\d{4}$/);
      expect(w.masked_text).toContain(PLACEHOLDER);
    }
  });

  it("tolerates blank lines and preserves order", () => {
    const text = '{"mention_id":"a:0000","masked_text":"x"}\n\n{"mention_id":"b:0000","masked_text":"y"}\n';
    expect(parseWindows(text).map((w) => w.mention_id)).toEqual(["a:0000", "b:0000"]);
  });

  it("reports the offending line number for broken JSON", () => {
    const text = '{"mention_id":"a:0000","masked_text":"x"}\nnot json\n';
    expect(() => parseWindows(text)).toThrowError(/line 2/);
  });

  it("rejects a record missing a field", () => {
    try {
      parseWindows('{"mention_id":"a:0000"}\n');
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(BridgeError);
      expect((err as BridgeError).kind).toBe("bad-record");
      expect((err as BridgeError).message).toContain("masked_text");
    }
  });
});

describe("train file parsing", () => {
  it("accepts the canonical labels only", () => {
    const good = '{"mention_id":"a:0000","masked_text":"x","label":"Neutral"}\n';
    expect(parseTrainFile(good)[0]!.label).toBe("Neutral");
    const bad = '{"mention_id":"a:0000","masked_text":"x","label":"positive"}\n';
    expect(() => parseTrainFile(bad)).toThrowError(/label/);
  });

  it("parses the train fixture with balanced labels", () => {
    const instances = parseTrainFile(readFixture("train30.jsonl"));
    expect(instances).toHaveLength(30);
    for (const label of LABELS) {
      expect(instances.filter((r) => r.label === label)).toHaveLength(10);
    }
  });
});

describe("prompt parsing", () => {
  it("parses the core prompt fixture", () => {
    const prompts = parsePrompts(readFixture("prompts3.jsonl"));
    expect(prompts.map((p) => p.mention_id)).toEqual(["b02:0000", "b03:0000", "b03:0003"]);
    expect(prompts.map((p) => p.label)).toEqual(["Positive", "Positive", "Negative"]);
    for (const p of prompts) {
      expect(p.prompt).toContain("The target therapy in this post is");
    }
  });
});

describe("serialization", () => {
  it("writes predictions one line per record with sorted keys", () => {
    const text = formatPredictions([
      { mention_id: "b:0001", label: "Positive", confidence: 0.75 },
      { mention_id: "a:0000", label: "Negative", confidence: 1 },
    ]);
    const lines = nonBlankLines(text);
    expect(lines).toHaveLength(2);
    expect(lines[0]).toBe('{"confidence":0.75,"label":"Positive","mention_id":"b:0001"}');
    expect(lines[1]).toBe('{"confidence":1,"label":"Negative","mention_id":"a:0000"}');
    expect(text.endsWith("\n")).toBe(true);
  });

  it("round-trips train instances through format and parse", () => {
    const original = parseTrainFile(readFixture("instances4.jsonl"));
    expect(parseTrainFile(formatTrainFile(original))).toEqual(original);
  });

  it("serializes empty inputs to empty files", () => {
    expect(formatPredictions([])).toBe("");
    expect(formatTrainFile([])).toBe("");
  });
});
