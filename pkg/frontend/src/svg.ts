// Minimal SVG line-chart emitter: axes with ticks, one polyline per series,
// and a legend. No dependencies; output is a standalone .svg file.

import { FigureData, Series } from "./figure";

const WIDTH = 860;
const HEIGHT = 540;
const MARGIN = { left: 70, right: 220, top: 30, bottom: 55 };
const COLORS = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];
const DASHES = ["", "6,3", "2,2", "8,3,2,3"];

interface Extent {
  min: number;
  max: number;
}

function extent(values: number[]): Extent {
  return { min: Math.min(...values), max: Math.max(...values) };
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / chosen) * chosen; v <= hi + 1e-12; v += chosen) {
    ticks.push(Number(v.toFixed(12)));
  }
  return ticks;
}

export function renderSvg(figure: FigureData): string {
  const points = figure.series.filter((s) => s.x.length > 0);
  if (points.length === 0) {
    throw new Error("nothing to draw: every series is empty");
  }
  const xs = extent(points.flatMap((s) => s.x));
  const yRaw = points.flatMap((s) => s.y);
  const log = figure.yScale === "log";
  const ys = log
    ? extent(yRaw.map((v) => Math.log10(v)))
    : extent([0, ...yRaw]);
  if (xs.max === xs.min) {
    xs.max += 1;
    xs.min -= 1;
  }
  if (ys.max === ys.min) ys.max += 1;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const px = (x: number) => MARGIN.left + ((x - xs.min) / (xs.max - xs.min)) * plotW;
  const py = (y: number) => {
    const v = log ? Math.log10(y) : y;
    return MARGIN.top + plotH - ((v - ys.min) / (ys.max - ys.min)) * plotH;
  };

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12" ` +
      `data-y-scale="${figure.yScale}" data-series-count="${figure.series.length}">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // frame
  const x0 = MARGIN.left, y0 = MARGIN.top, x1 = MARGIN.left + plotW, y1 = MARGIN.top + plotH;
  parts.push(
    `<rect x="${x0}" y="${y0}" width="${plotW}" height="${plotH}" fill="none" stroke="#333"/>`
  );

  // x ticks
  for (const t of niceTicks(xs.min, xs.max, 8)) {
    const x = px(t);
    parts.push(`<line x1="${x}" y1="${y1}" x2="${x}" y2="${y1 + 5}" stroke="#333"/>`);
    parts.push(
      `<text x="${x}" y="${y1 + 20}" text-anchor="middle">${t}</text>`
    );
  }
  // y ticks
  if (log) {
    for (let d = Math.ceil(ys.min); d <= Math.floor(ys.max) + 1e-9; d++) {
      const y = py(Math.pow(10, d));
      parts.push(`<line x1="${x0 - 5}" y1="${y}" x2="${x0}" y2="${y}" stroke="#333"/>`);
      parts.push(
        `<line x1="${x0}" y1="${y}" x2="${x1}" y2="${y}" stroke="#ddd"/>`
      );
      parts.push(
        `<text x="${x0 - 8}" y="${y + 4}" text-anchor="end">1e${d}</text>`
      );
    }
  } else {
    for (const t of niceTicks(ys.min, ys.max, 8)) {
      const y = py(t);
      parts.push(`<line x1="${x0 - 5}" y1="${y}" x2="${x0}" y2="${y}" stroke="#333"/>`);
      parts.push(`<line x1="${x0}" y1="${y}" x2="${x1}" y2="${y}" stroke="#ddd"/>`);
      parts.push(`<text x="${x0 - 8}" y="${y + 4}" text-anchor="end">${t}</text>`);
    }
  }

  // axis labels
  parts.push(
    `<text x="${x0 + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle">${figure.xLabel}</text>`
  );
  parts.push(
    `<text x="18" y="${y0 + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${y0 + plotH / 2})">${figure.yLabel}</text>`
  );

  // series
  figure.series.forEach((s: Series, i: number) => {
    if (s.x.length === 0) return;
    const color = COLORS[i % COLORS.length];
    const dash = DASHES[Math.floor(i / COLORS.length) % DASHES.length];
    const coords = s.x.map((x, j) => `${px(x).toFixed(2)},${py(s.y[j]).toFixed(2)}`);
    parts.push(
      `<polyline points="${coords.join(" ")}" fill="none" stroke="${color}" ` +
        `stroke-width="1.6"${dash ? ` stroke-dasharray="${dash}"` : ""}/>`
    );
  });

  // legend
  figure.series.forEach((s: Series, i: number) => {
    const color = COLORS[i % COLORS.length];
    const y = y0 + 16 + i * 18;
    const lx = x1 + 14;
    parts.push(
      `<line x1="${lx}" y1="${y - 4}" x2="${lx + 22}" y2="${y - 4}" ` +
        `stroke="${color}" stroke-width="1.6"/>`
    );
    parts.push(`<text x="${lx + 28}" y="${y}">${escapeXml(s.label)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}
