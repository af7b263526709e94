/**
 * CSV parsing for the two artifact schemas emitted by the statfem CLI:
 *
 *   rates.csv      nu,lengthscale,variance,n_fe,n,mean_l2,std_l2,
 *                  theory_slope,fitted_slope
 *   posterior.csv  x,mean,sd,truth,data_x,data_y
 *
 * Schema violations throw SchemaError naming the missing column so the CLI
 * can exit nonzero with a useful message.
 */

export class SchemaError extends Error {}

export interface RateRow {
  nu: number;
  lengthscale: number;
  variance: number;
  n_fe: number;
  n: number;
  mean_l2: number;
  std_l2: number;
  theory_slope: number;
  fitted_slope: number;
}

export interface PosteriorData {
  x: number[];
  mean: number[];
  sd: number[];
  /** Absent when the source CSV carries no truth column. */
  truth: number[] | null;
  points: { x: number; y: number }[];
}

const RATE_COLUMNS = [
  "nu", "lengthscale", "variance", "n_fe", "n",
  "mean_l2", "std_l2", "theory_slope", "fitted_slope",
] as const;

function splitLines(text: string): string[] {
  return text.split(/\r?\n/).filter((line) => line.trim().length > 0);
}

function headerIndex(header: string[], required: readonly string[], path: string): Map<string, number> {
  const index = new Map<string, number>();
  header.forEach((name, i) => index.set(name.trim(), i));
  for (const name of required) {
    if (!index.has(name)) {
      throw new SchemaError(`${path}: missing required column '${name}'`);
    }
  }
  return index;
}

export function parseRatesCsv(text: string, path = "rates.csv"): RateRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new SchemaError(`${path}: empty file`);
  const index = headerIndex(lines[0].split(","), RATE_COLUMNS, path);
  return lines.slice(1).map((line) => {
    const cells = line.split(",");
    const get = (name: string) => Number(cells[index.get(name)!]);
    return {
      nu: get("nu"),
      lengthscale: get("lengthscale"),
      variance: get("variance"),
      n_fe: get("n_fe"),
      n: get("n"),
      mean_l2: get("mean_l2"),
      std_l2: get("std_l2"),
      theory_slope: get("theory_slope"),
      fitted_slope: get("fitted_slope"),
    };
  });
}

export function parsePosteriorCsv(
  text: string,
  path = "posterior.csv",
  warn: (msg: string) => void = console.warn,
): PosteriorData {
  const lines = splitLines(text);
  if (lines.length === 0) throw new SchemaError(`${path}: empty file`);
  const header = lines[0].split(",");
  const index = headerIndex(header, ["x", "mean", "sd"], path);
  const hasTruth = index.has("truth");
  if (!hasTruth) warn(`${path}: no 'truth' column; plotting without the reference line`);
  const hasData = index.has("data_x") && index.has("data_y");

  const out: PosteriorData = { x: [], mean: [], sd: [], truth: hasTruth ? [] : null, points: [] };
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    const get = (name: string) => Number(cells[index.get(name)!]);
    out.x.push(get("x"));
    out.mean.push(get("mean"));
    out.sd.push(get("sd"));
    if (out.truth) out.truth.push(get("truth"));
    if (hasData) {
      const dx = cells[index.get("data_x")!];
      const dy = cells[index.get("data_y")!];
      if (dx !== undefined && dx.trim() !== "" && dy !== undefined && dy.trim() !== "") {
        out.points.push({ x: Number(dx), y: Number(dy) });
      }
    }
  }
  return out;
}
