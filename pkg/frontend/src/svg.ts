/**
 * Deterministic SVG scene building: fixed palette, fixed fonts, no timestamps,
 * coordinates rounded to 0.01 px so identical inputs give identical bytes.
 */

export type AxisKind = "linear" | "log";

export interface Viewport {
  x0: number; // pixel box
  y0: number;
  width: number;
  height: number;
  xAxis: AxisKind;
  yAxis: AxisKind;
  xRange: [number, number]; // data range
  yRange: [number, number];
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const FONT = 'font-family="Helvetica,Arial,sans-serif"';

function fmt(v: number): string {
  return v.toFixed(2);
}

function project(v: number, kind: AxisKind, range: [number, number], p0: number, p1: number): number {
  const t =
    kind === "log"
      ? (Math.log10(v) - Math.log10(range[0])) / (Math.log10(range[1]) - Math.log10(range[0]))
      : (v - range[0]) / (range[1] - range[0]);
  return p0 + t * (p1 - p0);
}

export function px(vp: Viewport, x: number): number {
  return project(x, vp.xAxis, vp.xRange, vp.x0, vp.x0 + vp.width);
}

export function py(vp: Viewport, y: number): number {
  return project(y, vp.yAxis, vp.yRange, vp.y0 + vp.height, vp.y0);
}

function tickValues(kind: AxisKind, range: [number, number], n = 5): number[] {
  if (kind === "log") {
    const lo = Math.ceil(Math.log10(range[0]));
    const hi = Math.floor(Math.log10(range[1]));
    const step = Math.max(1, Math.round((hi - lo) / n));
    const out: number[] = [];
    for (let e = lo; e <= hi; e += step) out.push(10 ** e);
    return out;
  }
  const span = range[1] - range[0];
  const raw = span / n;
  const mag = 10 ** Math.floor(Math.log10(raw));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= n + 1) ?? mag * 10;
  const out: number[] = [];
  for (let v = Math.ceil(range[0] / step) * step; v <= range[1] + 1e-12; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

function tickLabel(v: number, kind: AxisKind): string {
  if (kind === "log") {
    const e = Math.round(Math.log10(v));
    return `1e${e}`;
  }
  return Math.abs(v) >= 1000 || (v !== 0 && Math.abs(v) < 0.01)
    ? v.toExponential(0)
    : String(Number(v.toPrecision(3)));
}

export class Scene {
  private parts: string[] = [];

  constructor(
    readonly width: number,
    readonly height: number,
  ) {}

  raw(s: string): void {
    this.parts.push(s);
  }

  axes(vp: Viewport, xLabel: string, yLabel: string, fontSize = 12): void {
    const { x0, y0, width, height } = vp;
    this.parts.push(
      `<rect x="${fmt(x0)}" y="${fmt(y0)}" width="${fmt(width)}" height="${fmt(height)}" fill="none" stroke="#000" stroke-width="1"/>`,
    );
    for (const v of tickValues(vp.xAxis, vp.xRange)) {
      if (v < vp.xRange[0] - 1e-12 || v > vp.xRange[1] + 1e-12) continue;
      const X = px(vp, v);
      this.parts.push(
        `<line x1="${fmt(X)}" y1="${fmt(y0 + height)}" x2="${fmt(X)}" y2="${fmt(y0 + height - 5)}" stroke="#000" stroke-width="1"/>`,
        `<text x="${fmt(X)}" y="${fmt(y0 + height + fontSize + 4)}" text-anchor="middle" font-size="${fontSize}" ${FONT}>${tickLabel(v, vp.xAxis)}</text>`,
      );
    }
    for (const v of tickValues(vp.yAxis, vp.yRange)) {
      if (v < vp.yRange[0] - 1e-12 || v > vp.yRange[1] + 1e-12) continue;
      const Y = py(vp, v);
      this.parts.push(
        `<line x1="${fmt(x0)}" y1="${fmt(Y)}" x2="${fmt(x0 + 5)}" y2="${fmt(Y)}" stroke="#000" stroke-width="1"/>`,
        `<text x="${fmt(x0 - 6)}" y="${fmt(Y + fontSize / 3)}" text-anchor="end" font-size="${fontSize}" ${FONT}>${tickLabel(v, vp.yAxis)}</text>`,
      );
    }
    this.parts.push(
      `<text x="${fmt(x0 + width / 2)}" y="${fmt(y0 + height + 2.6 * fontSize)}" text-anchor="middle" font-size="${fontSize + 2}" ${FONT}>${xLabel}</text>`,
      `<text x="${fmt(x0 - 46)}" y="${fmt(y0 + height / 2)}" text-anchor="middle" font-size="${fontSize + 2}" ${FONT} transform="rotate(-90 ${fmt(x0 - 46)} ${fmt(y0 + height / 2)})">${yLabel}</text>`,
    );
  }

  polyline(vp: Viewport, xs: number[], ys: number[], color: string, width = 1.6, dashed = false): void {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; i++) {
      const x = xs[i];
      const y = ys[i];
      if (!isFinite(x) || !isFinite(y)) continue;
      if (vp.xAxis === "log" && x <= 0) continue;
      if (vp.yAxis === "log" && y <= 0) continue;
      pts.push(`${fmt(px(vp, x))},${fmt(py(vp, y))}`);
    }
    if (pts.length === 0) return;
    const dash = dashed ? ' stroke-dasharray="6 4"' : "";
    this.parts.push(
      `<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="${width}"${dash}/>`,
    );
  }

  markers(vp: Viewport, xs: number[], ys: number[], color: string, r = 3): void {
    for (let i = 0; i < xs.length; i++) {
      if (!isFinite(xs[i]) || !isFinite(ys[i])) continue;
      this.parts.push(
        `<circle cx="${fmt(px(vp, xs[i]))}" cy="${fmt(py(vp, ys[i]))}" r="${r}" fill="${color}"/>`,
      );
    }
  }

  vline(vp: Viewport, x: number, color: string, dashed = true): void {
    const X = px(vp, x);
    const dash = dashed ? ' stroke-dasharray="5 4"' : "";
    this.parts.push(
      `<line x1="${fmt(X)}" y1="${fmt(vp.y0)}" x2="${fmt(X)}" y2="${fmt(vp.y0 + vp.height)}" stroke="${color}" stroke-width="1.2"${dash}/>`,
    );
  }

  hline(vp: Viewport, y: number, color: string, dashed = true): void {
    const Y = py(vp, y);
    const dash = dashed ? ' stroke-dasharray="5 4"' : "";
    this.parts.push(
      `<line x1="${fmt(vp.x0)}" y1="${fmt(Y)}" x2="${fmt(vp.x0 + vp.width)}" y2="${fmt(Y)}" stroke="${color}" stroke-width="1"${dash}/>`,
    );
  }

  label(x: number, y: number, text: string, size = 12, color = "#000", anchor = "start"): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" font-size="${size}" fill="${color}" ${FONT}>${text}</text>`,
    );
  }

  legend(x: number, y: number, entries: Array<[string, string]>, size = 11): void {
    entries.forEach(([name, color], i) => {
      const Y = y + i * (size + 5);
      this.parts.push(
        `<line x1="${fmt(x)}" y1="${fmt(Y - size / 3)}" x2="${fmt(x + 18)}" y2="${fmt(Y - size / 3)}" stroke="${color}" stroke-width="2"/>`,
        `<text x="${fmt(x + 24)}" y="${fmt(Y)}" font-size="${size}" ${FONT}>${name}</text>`,
      );
    });
  }

  insetBackground(vp: Viewport): void {
    this.parts.push(
      `<rect x="${fmt(vp.x0 - 4)}" y="${fmt(vp.y0 - 4)}" width="${fmt(vp.width + 8)}" height="${fmt(vp.height + 8)}" fill="#ffffff" stroke="none"/>`,
    );
  }

  toString(): string {
    return (
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n` +
      `<rect width="${this.width}" height="${this.height}" fill="#ffffff"/>\n` +
      this.parts.join("\n") +
      "\n</svg>\n"
    );
  }
}

export function padRange(lo: number, hi: number, frac = 0.05): [number, number] {
  const span = hi - lo || 1;
  return [lo - frac * span, hi + frac * span];
}

export function logRange(values: number[]): [number, number] {
  const pos = values.filter((v) => isFinite(v) && v > 0);
  if (pos.length === 0) throw new Error("no positive values for a log axis");
  return [Math.min(...pos), Math.max(...pos)];
}
