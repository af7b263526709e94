/**
 * Minimal deterministic SVG output: fixed canvas size, fixed-precision
 * coordinates, no timestamps or generated ids.
 */

export interface Attrs {
  [key: string]: string | number;
}

export function fmt(v: number): string {
  if (!Number.isFinite(v)) throw new Error(`non-finite coordinate: ${v}`);
  return v.toFixed(2).replace(/^-0\.00$/, "0.00");
}

export function el(tag: string, attrs: Attrs, children: string[] = []): string {
  const body = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? fmt(v) : v}"`)
    .join(" ");
  if (children.length === 0) return `<${tag} ${body}/>`;
  return `<${tag} ${body}>\n${children.join("\n")}\n</${tag}>`;
}

export function polylinePoints(pts: { px: number; py: number }[]): string {
  return pts.map((p) => `${fmt(p.px)},${fmt(p.py)}`).join(" ");
}

export function svgDocument(width: number, height: number, children: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    el("rect", { x: 0, y: 0, width, height, fill: "white" }),
    ...children,
    "</svg>",
    "",
  ].join("\n");
}

/** Affine map from a data interval to a pixel interval. */
export class LinearScale {
  constructor(
    private d0: number,
    private d1: number,
    private p0: number,
    private p1: number,
  ) {
    if (d1 === d0) {
      // degenerate domain: pad so the single value sits mid-range
      this.d0 = d0 - 1;
      this.d1 = d1 + 1;
    }
  }

  map(v: number): number {
    return this.p0 + ((v - this.d0) / (this.d1 - this.d0)) * (this.p1 - this.p0);
  }

  ticks(count = 5): number[] {
    const out: number[] = [];
    for (let i = 0; i < count; i++) {
      out.push(this.d0 + ((this.d1 - this.d0) * i) / (count - 1));
    }
    return out;
  }
}
