import { describe, expect, it } from "vitest";
import { MissingColumnError, parseFilter, parseResults } from "../src/csv.js";

const HEADER =
  "generator,policy,feedback,n,k,M,seed,surrogate_gap,exact_gap,rounds,assumption_ok,wall_time_ms,error";

function csv(rows: string[]): string {
  return [HEADER, ...rows].join("\n") + "\n";
}

describe("parseResults", () => {
  it("reads well-formed rows", () => {
    const { rows, skipped } = parseResults(
      csv([
        "gaussian,rand,semi,3,2,50,0,1.25,0.5,12,true,10.000,",
        "gaussian,rand,semi,3,2,400,0,0.75,,12,true,11.000,",
      ]),
    );
    expect(skipped).toBe(0);
    expect(rows).toHaveLength(2);
    expect(rows[0]).toEqual({
      generator: "gaussian",
      policy: "rand",
      feedback: "semi",
      n: 3,
      k: 2,
      M: 50,
      seed: 0,
      gap: 1.25,
    });
    expect(rows[1].M).toBe(400);
  });

  it("skips error rows and rows without a gap", () => {
    const { rows, skipped } = parseResults(
      csv([
        "gaussian,rand,semi,3,2,50,0,1.25,,1,true,10.000,",
        'gaussian,builtin:D,semi,3,2,50,0,,,,,0.100,"InvalidActionError: agent 1"',
        "gaussian,rand,semi,3,2,50,1,,,1,true,10.000,",
      ]),
    );
    expect(rows).toHaveLength(1);
    expect(skipped).toBe(2);
  });

  it("names the missing column", () => {
    const bad = "generator,policy,feedback,n,k,M,seed,error\ngaussian,rand,semi,3,2,50,0,\n";
    expect(() => parseResults(bad)).toThrowError(MissingColumnError);
    expect(() => parseResults(bad)).toThrowError(/"surrogate_gap"/);
  });
});

describe("parseFilter", () => {
  const row = {
    generator: "gaussian",
    policy: "rand",
    feedback: "semi",
    n: 3,
    k: 2,
    M: 50,
    seed: 0,
    gap: 1.0,
  };

  it("matches on every term", () => {
    expect(parseFilter("generator=gaussian,n=3")(row)).toBe(true);
    expect(parseFilter("generator=gaussian,n=4")(row)).toBe(false);
    expect(parseFilter("policy=rand")(row)).toBe(true);
  });

  it("compares numbers as their string form", () => {
    expect(parseFilter("M=50")(row)).toBe(true);
    expect(parseFilter("M=050")(row)).toBe(false);
  });

  it("rejects unknown keys and malformed terms", () => {
    expect(() => parseFilter("colour=red")).toThrowError(/unknown filter key "colour"/);
    expect(() => parseFilter("generator")).toThrowError(/expected key=value/);
  });
});
