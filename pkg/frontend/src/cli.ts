#!/usr/bin/env node
/**
 * plot-tool: render statfem CSV artifacts as SVG figures.
 *
 * Usage:
 *   plot-tool --kind convergence --in rates.csv [--in baseline_rates.csv] --out fig.svg [--no-guide]
 *   plot-tool --kind posterior   --in posterior.csv --out fig.svg
 *
 * Inputs are read-only; rerunning with identical inputs overwrites the
 * output byte-for-byte.
 */

import { readFileSync, writeFileSync } from "fs";
import * as path from "path";

import { parsePosteriorCsv, parseRatesCsv, SchemaError } from "./csv";
import { buildConvergencePlot, renderConvergenceSvg } from "./convergence";
import { buildPosteriorPlot, renderPosteriorSvg } from "./posterior";

export interface CliOptions {
  kind: "convergence" | "posterior";
  inputs: string[];
  out: string;
  guide: boolean;
}

export function parseArgs(argv: string[]): CliOptions {
  const opts: CliOptions = { kind: "convergence", inputs: [], out: "", guide: true };
  let kindSet = false;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) throw new Error(`missing value for ${arg}`);
      return argv[i];
    };
    if (arg === "--kind") {
      const kind = next();
      if (kind !== "convergence" && kind !== "posterior") {
        throw new Error(`--kind must be 'convergence' or 'posterior', got '${kind}'`);
      }
      opts.kind = kind;
      kindSet = true;
    } else if (arg === "--in") {
      opts.inputs.push(...next().split(",").filter((s) => s.length > 0));
    } else if (arg === "--out") {
      opts.out = next();
    } else if (arg === "--no-guide") {
      opts.guide = false;
    } else {
      throw new Error(`unknown argument '${arg}'`);
    }
  }
  if (!kindSet) throw new Error("--kind is required");
  if (opts.inputs.length === 0) throw new Error("--in is required");
  if (!opts.out) throw new Error("--out is required");
  return opts;
}

/** The tool emits SVG; a raster extension is rewritten with a warning. */
export function resolveOutputPath(out: string, warn: (msg: string) => void): string {
  const ext = path.extname(out).toLowerCase();
  if (ext === ".svg") return out;
  const replaced = out.slice(0, out.length - ext.length) + ".svg";
  warn(`plot-tool writes SVG; output renamed ${out} -> ${replaced}`);
  return replaced;
}

export function run(argv: string[], warn: (msg: string) => void = console.warn): number {
  let opts: CliOptions;
  try {
    opts = parseArgs(argv);
  } catch (err) {
    warn(String(err instanceof Error ? err.message : err));
    return 2;
  }
  try {
    let svg: string;
    if (opts.kind === "convergence") {
      const [primary, ...rest] = opts.inputs;
      const rows = parseRatesCsv(readFileSync(primary, "utf-8"), primary);
      const overlays = rest.map((p) => parseRatesCsv(readFileSync(p, "utf-8"), p));
      const plot = buildConvergencePlot(rows, overlays, opts.guide);
      plot.warnings.forEach(warn);
      svg = renderConvergenceSvg(plot);
    } else {
      if (opts.inputs.length !== 1) {
        throw new Error("posterior plots take exactly one --in file");
      }
      const data = parsePosteriorCsv(
        readFileSync(opts.inputs[0], "utf-8"), opts.inputs[0], warn);
      svg = renderPosteriorSvg(buildPosteriorPlot(data));
    }
    writeFileSync(resolveOutputPath(opts.out, warn), svg, "utf-8");
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      warn(err.message);
      return 1;
    }
    warn(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

if (require.main === module) {
  process.exit(run(process.argv.slice(2)));
}
