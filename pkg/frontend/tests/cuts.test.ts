import { describe, expect, it } from "vitest";

import { formatCutArray, roundToMs, validateCutArray } from "../src/cuts.js";

describe("cut array validation", () => {
  it("accepts a well-formed document", () => {
    validateCutArray({
      duration: 20,
      cuts: [
        { time: 0, angle: 1 },
        { time: 10, angle: 2 },
      ],
    });
  });

  it("requires the initial cut at time zero", () => {
    expect(() =>
      validateCutArray({ duration: 10, cuts: [{ time: 1, angle: 0 }] }),
    ).toThrow(/time 0/);
  });

  it("rejects non-increasing times", () => {
    expect(() =>
      validateCutArray({
        duration: 10,
        cuts: [
          { time: 0, angle: 0 },
          { time: 5, angle: 1 },
          { time: 5, angle: 0 },
        ],
      }),
    ).toThrow(/strictly increase/);
  });

  it("rejects repeated consecutive angles", () => {
    expect(() =>
      validateCutArray({
        duration: 10,
        cuts: [
          { time: 0, angle: 0 },
          { time: 5, angle: 0 },
        ],
      }),
    ).toThrow(/switch angles/);
  });

  it("rejects cuts at or past the duration", () => {
    expect(() =>
      validateCutArray({
        duration: 10,
        cuts: [
          { time: 0, angle: 0 },
          { time: 10, angle: 1 },
        ],
      }),
    ).toThrow(/before the video ends/);
  });

  it("rejects unknown experience values", () => {
    expect(() =>
      validateCutArray({
        duration: 10,
        cuts: [{ time: 0, angle: 0 }],
        // @ts-expect-error deliberately wrong
        experience: "expert",
      }),
    ).toThrow(/experience/);
  });
});

describe("formatting", () => {
  it("is deterministic and parses back", () => {
    const doc = {
      duration: 30,
      cuts: [
        { time: 0, angle: 0 },
        { time: 3.2, angle: 2 },
      ],
      experience: "some" as const,
      session: "run-1",
    };
    const a = formatCutArray(doc);
    const b = formatCutArray(doc);
    expect(a).toBe(b);
    expect(JSON.parse(a)).toEqual(doc);
  });

  it("rounds to milliseconds", () => {
    expect(roundToMs(3.20049)).toBe(3.2);
    expect(roundToMs(3.2005)).toBe(3.201);
  });
});
