import { describe, expect, it } from "vitest";

import {
  FormatError,
  mvpeText,
  proposalsText,
  validateMvpeText,
  validateProposalsText,
} from "../src/formats";

function unit(dim: number, axis = 0): Float64Array {
  const v = new Float64Array(dim);
  v[axis] = 1;
  return v;
}

describe("proposals text", () => {
  it("round-trips through its validator", () => {
    const text = proposalsText(4, [
      { frame: 3, bbox: [1, 2, 11, 12], score: 0.5, embedding: unit(4) },
      { frame: 0, bbox: [5.5, 6.25, 9.75, 10.125], score: 1.0, embedding: unit(4, 2) },
    ]);
    expect(validateProposalsText(text)).toBe(2);
    // Records sorted by frame.
    const lines = text.trim().split("\n");
    expect(lines[2].startsWith("0 ")).toBe(true);
    expect(lines[3].startsWith("3 ")).toBe(true);
  });

  it("header-only file is valid and empty", () => {
    const text = proposalsText(8, []);
    expect(validateProposalsText(text)).toBe(0);
  });

  it("rejects bad embeddings at write time", () => {
    const bad = new Float64Array(4).fill(1); // norm 2
    expect(() =>
      proposalsText(4, [{ frame: 0, bbox: [0, 0, 1, 1], score: 0.5, embedding: bad }])
    ).toThrow(FormatError);
  });

  it("validator rejects corrupted norms and field counts", () => {
    expect(() => validateProposalsText("dim 2\n0 0 0 1 1 0.5 3 0\n")).toThrow(FormatError);
    expect(() => validateProposalsText("dim 2\n0 0 0 1 1 0.5 1\n")).toThrow(FormatError);
    expect(() => validateProposalsText("0 0 0 1 1 0.5 1 0\n")).toThrow(FormatError);
  });

  it("rejects degenerate boxes and out-of-range scores", () => {
    expect(() =>
      proposalsText(2, [{ frame: 0, bbox: [5, 0, 5, 1], score: 0.5, embedding: unit(2) }])
    ).toThrow(FormatError);
    expect(() =>
      proposalsText(2, [{ frame: 0, bbox: [0, 0, 1, 1], score: 1.5, embedding: unit(2) }])
    ).toThrow(FormatError);
  });
});

describe("enrollment text", () => {
  it("round-trips through its validator", () => {
    const views = new Map([
      ["mug", [unit(3), unit(3, 1)]],
      ["pen", [unit(3, 2)]],
    ]);
    const text = mvpeText(3, views);
    expect(validateMvpeText(text)).toBe(3);
  });

  it("validator rejects dimension drift", () => {
    expect(() => validateMvpeText("dim 3\nview mug 1 0\n")).toThrow(FormatError);
  });
});
