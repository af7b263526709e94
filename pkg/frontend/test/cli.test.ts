import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import * as path from "path";
import { describe, expect, it } from "vitest";

import { parseArgs, resolveOutputPath, run } from "../src/cli";
import { parseRatesCsv, SchemaError } from "../src/csv";

const FIXTURES = path.join(__dirname, "fixtures");
const rates = path.join(FIXTURES, "rates.csv");
const baseline = path.join(FIXTURES, "baseline_rates.csv");
const posterior = path.join(FIXTURES, "posterior.csv");

function tmp(): string {
  return mkdtempSync(path.join(tmpdir(), "plot-tool-"));
}

describe("argument parsing", () => {
  it("parses the documented invocation", () => {
    const opts = parseArgs(["--kind", "convergence", "--in", rates, "--out", "fig.svg"]);
    expect(opts.kind).toBe("convergence");
    expect(opts.inputs).toEqual([rates]);
    expect(opts.guide).toBe(true);
  });

  it("accepts repeated and comma-separated inputs", () => {
    const opts = parseArgs([
      "--kind", "convergence", "--in", `${rates},${baseline}`, "--out", "f.svg"]);
    expect(opts.inputs).toHaveLength(2);
  });

  it("rejects unknown kinds and arguments", () => {
    expect(() => parseArgs(["--kind", "pie", "--in", rates, "--out", "f.svg"]))
      .toThrow(/kind/);
    expect(() => parseArgs(["--kind", "posterior", "--frobnicate"]))
      .toThrow(/unknown argument/);
  });

  it("rewrites raster extensions to svg with a warning", () => {
    const warnings: string[] = [];
    const out = resolveOutputPath("fig.png", (m) => warnings.push(m));
    expect(out).toBe("fig.svg");
    expect(warnings).toHaveLength(1);
  });
});

describe("end-to-end runs", () => {
  it("writes a convergence figure", () => {
    const out = path.join(tmp(), "fig.svg");
    const code = run(["--kind", "convergence", "--in", rates, "--out", out], () => {});
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf-8");
    expect(svg).toContain("theory-guide");
    expect(svg.length).toBeGreaterThan(500);
  });

  it("writes a posterior figure with band, truth and markers", () => {
    const out = path.join(tmp(), "posterior.svg");
    const code = run(["--kind", "posterior", "--in", posterior, "--out", out], () => {});
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf-8");
    expect(svg).toContain("credible-band");
    expect(svg).toContain("truth");
    expect(svg).toContain("observation");
  });

  it("overlays a baseline file", () => {
    const out = path.join(tmp(), "fig.svg");
    const code = run([
      "--kind", "convergence", "--in", rates, "--in", baseline, "--out", out],
      () => {});
    expect(code).toBe(0);
    expect((readFileSync(out, "utf-8").match(/class="series"/g) ?? []).length).toBe(2);
  });

  it("fails naming the missing column on schema mismatch", () => {
    const dir = tmp();
    const bad = path.join(dir, "bad.csv");
    writeFileSync(bad, "nu,lengthscale,variance,n_fe,n,mean_l2,std_l2,theory_slope\n");
    const warnings: string[] = [];
    const code = run(["--kind", "convergence", "--in", bad,
      "--out", path.join(dir, "f.svg")], (m) => warnings.push(m));
    expect(code).toBe(1);
    expect(warnings.some((w) => w.includes("fitted_slope"))).toBe(true);
  });

  it("missing input file is a runtime failure", () => {
    const dir = tmp();
    const code = run(["--kind", "convergence", "--in", path.join(dir, "nope.csv"),
      "--out", path.join(dir, "f.svg")], () => {});
    expect(code).toBe(1);
  });

  it("reruns byte-identically", () => {
    const dir = tmp();
    const out1 = path.join(dir, "a.svg");
    const out2 = path.join(dir, "b.svg");
    run(["--kind", "posterior", "--in", posterior, "--out", out1], () => {});
    run(["--kind", "posterior", "--in", posterior, "--out", out2], () => {});
    expect(readFileSync(out1, "utf-8")).toBe(readFileSync(out2, "utf-8"));
  });
});

describe("schema guard", () => {
  it("names the first missing column", () => {
    expect(() => parseRatesCsv("a,b\n1,2", "x.csv")).toThrow(SchemaError);
    try {
      parseRatesCsv("a,b\n1,2", "x.csv");
    } catch (err) {
      expect(String(err)).toContain("'nu'");
    }
  });

  it("missing secondary input surfaces as failure, not crash", () => {
    const dir = tmp();
    expect(existsSync(dir)).toBe(true);
    const code = run(["--kind", "convergence", "--in", rates,
      "--in", path.join(dir, "ghost.csv"), "--out", path.join(dir, "f.svg")],
      () => {});
    expect(code).toBe(1);
  });
});
