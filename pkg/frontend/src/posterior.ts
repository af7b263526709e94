/**
 * Posterior figure: conditional mean with a 95% credible band, the true
 * response as a dashed reference, and the noisy observations as markers.
 */

import { PosteriorData } from "./csv";
import { el, LinearScale, polylinePoints, svgDocument } from "./svg";

/** Standard-normal quantile matching the statfem reporting contract. */
export const CREDIBLE_95 = 1.959964;

export interface BandPoint {
  x: number;
  lo: number;
  hi: number;
}

export interface PosteriorPlot {
  mean: { x: number; y: number }[];
  band: BandPoint[];
  truth: { x: number; y: number }[] | null;
  points: { x: number; y: number }[];
}

export function buildPosteriorPlot(data: PosteriorData): PosteriorPlot {
  const mean = data.x.map((x, i) => ({ x, y: data.mean[i] }));
  const band = data.x.map((x, i) => ({
    x,
    lo: data.mean[i] - CREDIBLE_95 * data.sd[i],
    hi: data.mean[i] + CREDIBLE_95 * data.sd[i],
  }));
  const truth = data.truth
    ? data.x.map((x, i) => ({ x, y: data.truth![i] }))
    : null;
  return { mean, band, truth, points: data.points };
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { left: 64, right: 20, top: 24, bottom: 44 };

export function renderPosteriorSvg(plot: PosteriorPlot): string {
  const ys: number[] = [];
  for (const b of plot.band) ys.push(b.lo, b.hi);
  for (const t of plot.truth ?? []) ys.push(t.y);
  for (const p of plot.points) ys.push(p.y);
  const xs = plot.mean.map((p) => p.x);

  const x = new LinearScale(Math.min(...xs), Math.max(...xs),
    MARGIN.left, WIDTH - MARGIN.right);
  const y = new LinearScale(Math.max(...ys), Math.min(...ys),
    MARGIN.top, HEIGHT - MARGIN.bottom);

  const parts: string[] = [];
  parts.push(el("rect", {
    x: MARGIN.left, y: MARGIN.top,
    width: WIDTH - MARGIN.left - MARGIN.right,
    height: HEIGHT - MARGIN.top - MARGIN.bottom,
    fill: "none", stroke: "#444444", "stroke-width": 1,
  }));

  // credible band: forward pass along the upper edge, back along the lower
  const upper = plot.band.map((b) => ({ px: x.map(b.x), py: y.map(b.hi) }));
  const lower = [...plot.band].reverse().map((b) => ({ px: x.map(b.x), py: y.map(b.lo) }));
  parts.push(el("polygon", {
    points: polylinePoints([...upper, ...lower]),
    fill: "#9ec9e8", "fill-opacity": "0.55", stroke: "none", class: "credible-band",
  }));

  parts.push(el("polyline", {
    points: polylinePoints(plot.mean.map((p) => ({ px: x.map(p.x), py: y.map(p.y) }))),
    fill: "none", stroke: "#1f6fb4", "stroke-width": 2, class: "posterior-mean",
  }));

  if (plot.truth) {
    parts.push(el("polyline", {
      points: polylinePoints(plot.truth.map((p) => ({ px: x.map(p.x), py: y.map(p.y) }))),
      fill: "none", stroke: "#222222", "stroke-width": 1.5,
      "stroke-dasharray": "7 5", class: "truth",
    }));
  }

  for (const p of plot.points) {
    parts.push(el("circle", {
      cx: x.map(p.x), cy: y.map(p.y), r: 4,
      fill: "#c63f3f", class: "observation",
    }));
  }

  for (const tick of x.ticks(6)) {
    const px = x.map(tick);
    parts.push(el("line", {
      x1: px, y1: HEIGHT - MARGIN.bottom, x2: px, y2: HEIGHT - MARGIN.bottom + 4,
      stroke: "#444444", "stroke-width": 1,
    }));
    parts.push(el("text", {
      x: px, y: HEIGHT - MARGIN.bottom + 18, "text-anchor": "middle",
      "font-size": 11, "font-family": "sans-serif",
    }, [tick.toFixed(2)]));
  }
  for (const tick of y.ticks(6)) {
    const py = y.map(tick);
    parts.push(el("line", {
      x1: MARGIN.left - 4, y1: py, x2: MARGIN.left, y2: py,
      stroke: "#444444", "stroke-width": 1,
    }));
    parts.push(el("text", {
      x: MARGIN.left - 8, y: py + 4, "text-anchor": "end",
      "font-size": 11, "font-family": "sans-serif",
    }, [tick.toFixed(3)]));
  }
  return svgDocument(WIDTH, HEIGHT, parts);
}
