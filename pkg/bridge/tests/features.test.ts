import { describe, expect, it } from "vitest";

import { FEATURE_DIM, featurize, tokenize } from "../src/features.js";
import { PLACEHOLDER } from "../src/formats.js";

describe("tokenizer", () => {
  it("keeps the placeholder as one atomic token", () => {
    const tokens = tokenize(`took ${PLACEHOLDER} today and ${PLACEHOLDER} helped`, PLACEHOLDER, 128);
    expect(tokens).toEqual(["took", PLACEHOLDER, "today", "and", PLACEHOLDER, "helped"]);
  });

  it("never splits the placeholder even though it holds non-word characters", () => {
    const tokens = tokenize(`${PLACEHOLDER}, then nothing`, PLACEHOLDER, 128);
    expect(tokens[0]).toBe(PLACEHOLDER);
    expect(tokens).not.toContain("medication");
  });

  it("lowercases ordinary words and keeps apostrophes", () => {
    expect(tokenize("It DIDN'T help at ALL", PLACEHOLDER, 128)).toEqual([
      "it",
      "didn't",
      "help",
      "at",
      "all",
    ]);
  });

  it("truncates to the max sequence length", () => {
    const text = Array.from({ length: 50 }, (_, i) => `w${i}`).join(" ");
    expect(tokenize(text, PLACEHOLDER, 8)).toHaveLength(8);
  });
});

describe("featurizer", () => {
  it("produces a unit-norm vector with a bias slot", () => {
    const vec = featurize(`honestly ${PLACEHOLDER} saved me`, PLACEHOLDER, 128);
    expect(vec).toHaveLength(FEATURE_DIM + 1);
    let norm = 0;
    for (let j = 0; j < FEATURE_DIM; j++) norm += vec[j]! * vec[j]!;
    expect(norm).toBeCloseTo(1, 12);
    expect(vec[FEATURE_DIM]).toBe(1);
  });

  it("is deterministic and order-sensitive", () => {
    const a = featurize("x helped y", PLACEHOLDER, 128);
    const b = featurize("x helped y", PLACEHOLDER, 128);
    expect(Array.from(a)).toEqual(Array.from(b));
    const c = featurize("y helped x", PLACEHOLDER, 128);
    expect(Array.from(a)).not.toEqual(Array.from(c));
  });

  it("featurizes empty text as bias only", () => {
    const vec = featurize("", PLACEHOLDER, 128);
    for (let j = 0; j < FEATURE_DIM; j++) expect(vec[j]).toBe(0);
    expect(vec[FEATURE_DIM]).toBe(1);
  });
});
