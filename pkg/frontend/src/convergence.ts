/**
 * Log-log convergence figure: one panel per (nu, n_fe) series, the measured
 * error curve, an optional overlay (the data-driven baseline file), and a
 * dashed theory-slope guide anchored at the largest-n point.
 *
 * The plot model is built separately from rendering so tests can assert on
 * the guide's data rather than on pixels.
 */

import { RateRow } from "./csv";
import { el, fmt, LinearScale, polylinePoints, svgDocument } from "./svg";

export interface SeriesPoint {
  n: number;
  value: number;
}

export interface Series {
  label: string;
  color: string;
  points: SeriesPoint[];
}

export interface GuideLine {
  slope: number;
  points: [SeriesPoint, SeriesPoint];
}

export interface Panel {
  nu: number;
  n_fe: number;
  title: string;
  series: Series[];
  guide: GuideLine | null;
}

export interface ConvergencePlot {
  panels: Panel[];
  warnings: string[];
}

function groupKey(row: RateRow): string {
  return `${row.nu}|${row.lengthscale}|${row.variance}|${row.n_fe}`;
}

function groupSeries(rows: RateRow[]): Map<string, RateRow[]> {
  const groups = new Map<string, RateRow[]>();
  for (const row of rows) {
    const key = groupKey(row);
    const bucket = groups.get(key) ?? [];
    bucket.push(row);
    groups.set(key, bucket);
  }
  for (const bucket of groups.values()) bucket.sort((a, b) => a.n - b.n);
  return groups;
}

/** Power law through the last point with the series' theory exponent. */
export function theoryGuide(points: SeriesPoint[], slope: number): GuideLine {
  const last = points[points.length - 1];
  const first = points[0];
  const start: SeriesPoint = {
    n: first.n,
    value: last.value * Math.pow(first.n / last.n, slope),
  };
  return { slope, points: [start, { ...last }] };
}

export function buildConvergencePlot(
  rows: RateRow[],
  overlays: RateRow[][] = [],
  withGuide = true,
): ConvergencePlot {
  const warnings: string[] = [];
  const panels: Panel[] = [];
  const overlayGroups = overlays.map((o) => [...groupSeries(o).values()]);

  let seriesIndex = 0;
  for (const bucket of groupSeries(rows).values()) {
    const { nu, n_fe, lengthscale, variance, theory_slope } = bucket[0];
    if (bucket.length < 2) {
      warnings.push(`series nu=${nu} n_fe=${n_fe}: only ${bucket.length} point(s), skipped`);
      seriesIndex += 1;
      continue;
    }
    const panel: Panel = {
      nu,
      n_fe,
      title: `nu=${nu} l=${lengthscale} s2=${variance} n_fe=${n_fe}`,
      series: [{
        label: "induced prior",
        color: "#e07b27",
        points: bucket.map((r) => ({ n: r.n, value: r.mean_l2 })),
      }],
      guide: null,
    };
    for (const groups of overlayGroups) {
      const overlay = groups[seriesIndex];
      if (!overlay || overlay.length < 2) {
        warnings.push(`overlay for series nu=${nu} n_fe=${n_fe}: missing or too short, skipped`);
        continue;
      }
      panel.series.push({
        label: `matern baseline (nu=${overlay[0].nu})`,
        color: "#3d8c40",
        points: overlay.map((r) => ({ n: r.n, value: r.mean_l2 })),
      });
    }
    if (withGuide) {
      panel.guide = theoryGuide(panel.series[0].points, theory_slope);
    }
    panels.push(panel);
    seriesIndex += 1;
  }
  if (panels.length === 0) {
    warnings.push("no plottable series (every series has fewer than 2 points)");
  }
  return { panels, warnings };
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

const PANEL_W = 420;
const PANEL_H = 340;
const MARGIN = { left: 64, right: 16, top: 36, bottom: 46 };

function renderPanel(panel: Panel, offsetX: number): string {
  const logs: number[] = [];
  const logErrs: number[] = [];
  for (const s of panel.series) {
    for (const p of s.points) {
      logs.push(Math.log10(p.n));
      logErrs.push(Math.log10(p.value));
    }
  }
  if (panel.guide) {
    for (const p of panel.guide.points) logErrs.push(Math.log10(p.value));
  }
  const x = new LinearScale(Math.min(...logs), Math.max(...logs),
    offsetX + MARGIN.left, offsetX + PANEL_W - MARGIN.right);
  const y = new LinearScale(Math.max(...logErrs), Math.min(...logErrs),
    MARGIN.top, PANEL_H - MARGIN.bottom);

  const parts: string[] = [];
  parts.push(el("rect", {
    x: offsetX + MARGIN.left, y: MARGIN.top,
    width: PANEL_W - MARGIN.left - MARGIN.right,
    height: PANEL_H - MARGIN.top - MARGIN.bottom,
    fill: "none", stroke: "#444444", "stroke-width": 1,
  }));
  parts.push(el("text", {
    x: offsetX + PANEL_W / 2, y: MARGIN.top - 12,
    "text-anchor": "middle", "font-size": 13, "font-family": "sans-serif",
  }, [panel.title]));

  for (const tick of x.ticks(4)) {
    const px = x.map(tick);
    parts.push(el("line", {
      x1: px, y1: PANEL_H - MARGIN.bottom, x2: px, y2: PANEL_H - MARGIN.bottom + 4,
      stroke: "#444444", "stroke-width": 1,
    }));
    parts.push(el("text", {
      x: px, y: PANEL_H - MARGIN.bottom + 18, "text-anchor": "middle",
      "font-size": 11, "font-family": "sans-serif",
    }, [`1e${fmt(tick)}`]));
  }
  for (const tick of y.ticks(4)) {
    const py = y.map(tick);
    parts.push(el("line", {
      x1: offsetX + MARGIN.left - 4, y1: py, x2: offsetX + MARGIN.left, y2: py,
      stroke: "#444444", "stroke-width": 1,
    }));
    parts.push(el("text", {
      x: offsetX + MARGIN.left - 8, y: py + 4, "text-anchor": "end",
      "font-size": 11, "font-family": "sans-serif",
    }, [`1e${fmt(tick)}`]));
  }
  parts.push(el("text", {
    x: offsetX + PANEL_W / 2, y: PANEL_H - 8, "text-anchor": "middle",
    "font-size": 12, "font-family": "sans-serif",
  }, ["n (log)"]));

  if (panel.guide) {
    const pts = panel.guide.points.map((p) => ({
      px: x.map(Math.log10(p.n)), py: y.map(Math.log10(p.value)),
    }));
    parts.push(el("polyline", {
      points: polylinePoints(pts), fill: "none", stroke: "#555555",
      "stroke-width": 1.5, "stroke-dasharray": "6 4", class: "theory-guide",
    }));
  }
  for (const s of panel.series) {
    const pts = s.points.map((p) => ({
      px: x.map(Math.log10(p.n)), py: y.map(Math.log10(p.value)),
    }));
    parts.push(el("polyline", {
      points: polylinePoints(pts), fill: "none", stroke: s.color,
      "stroke-width": 2, class: "series",
    }));
    for (const p of pts) {
      parts.push(el("circle", { cx: p.px, cy: p.py, r: 3, fill: s.color }));
    }
  }
  panel.series.forEach((s, i) => {
    parts.push(el("text", {
      x: offsetX + MARGIN.left + 10, y: MARGIN.top + 16 + 14 * i,
      "font-size": 11, "font-family": "sans-serif", fill: s.color,
    }, [s.label]));
  });
  return parts.join("\n");
}

export function renderConvergenceSvg(plot: ConvergencePlot): string {
  if (plot.panels.length === 0) {
    throw new Error("nothing to plot: no series with at least 2 points");
  }
  const children = plot.panels.map((p, i) => renderPanel(p, i * PANEL_W));
  return svgDocument(PANEL_W * plot.panels.length, PANEL_H, children);
}
