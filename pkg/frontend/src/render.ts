/**
 * Log-log decay figure assembled as an SVG string.
 *
 * One curve per requested quantity, the fit window shaded, and a dashed
 * reference line per quantity whose slope is the expected exponent read
 * verbatim from the run report (this layer never re-fits anything).
 */
import { line as d3line, scaleLog, schemeCategory10 } from "d3";

import type { RunReport } from "./data.js";
import { expectedSlope, fitWindow, type SeriesTable } from "./data.js";

export interface RefLine {
  name: string;
  slope: number;
  t1: number;
  v1: number;
  t2: number;
  v2: number;
}

export interface LegendEntry {
  name: string;
  label: string;
  fitted?: number;
  expected?: number;
}

export interface RenderResult {
  svg: string;
  refLines: RefLine[];
  legend: LegendEntry[];
  warnings: string[];
}

export interface RenderOptions {
  width?: number;
  height?: number;
  title?: string;
}

interface Point {
  t: number;
  v: number;
}

function positivePoints(times: number[], values: number[]): Point[] {
  const pts: Point[] = [];
  for (let i = 0; i < times.length; i++) {
    if (times[i] > 0 && values[i] > 0 && Number.isFinite(values[i])) {
      pts.push({ t: times[i], v: values[i] });
    }
  }
  return pts;
}

function valueNear(pts: Point[], t: number): number {
  let best = pts[0];
  for (const p of pts) {
    if (Math.abs(Math.log(p.t / t)) < Math.abs(Math.log(best.t / t))) best = p;
  }
  return best.v;
}

const esc = (s: string) => s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function renderDecayFigure(
  table: SeriesTable,
  report: RunReport | undefined,
  quantities: string[],
  opts: RenderOptions = {},
): RenderResult {
  if (quantities.length === 0) {
    throw new Error("no quantities requested; nothing to plot");
  }
  const missing = quantities.filter((q) => !table.columns.has(q));
  if (missing.length > 0) {
    throw new Error(`missing column(s) in series data: ${missing.join(", ")}`);
  }
  const warnings: string[] = [];
  const seriesPoints = new Map<string, Point[]>();
  for (const q of quantities) {
    const pts = positivePoints(table.times, table.columns.get(q)!);
    if (pts.length === 0) {
      throw new Error(`quantity '${q}' has no positive samples to plot on log axes`);
    }
    seriesPoints.set(q, pts);
  }

  const width = opts.width ?? 760;
  const height = opts.height ?? 480;
  const margin = { top: 36, right: 20, bottom: 46, left: 64 };
  const innerW = width - margin.left - margin.right;
  const innerH = height - margin.top - margin.bottom;

  const allPts = [...seriesPoints.values()].flat();
  const tExtent: [number, number] = [
    Math.min(...allPts.map((p) => p.t)),
    Math.max(...allPts.map((p) => p.t)),
  ];
  const vExtent: [number, number] = [
    Math.min(...allPts.map((p) => p.v)),
    Math.max(...allPts.map((p) => p.v)),
  ];

  const x = scaleLog().domain(tExtent).range([margin.left, margin.left + innerW]);
  const y = scaleLog()
    .domain([vExtent[0] / 1.3, vExtent[1] * 1.3])
    .range([margin.top + innerH, margin.top]);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (opts.title) {
    parts.push(
      `<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">${esc(opts.title)}</text>`,
    );
  }

  // fit window shading
  const window = report ? fitWindow(report) : undefined;
  if (window) {
    const [lo, hi] = window;
    if (hi <= tExtent[0] || lo >= tExtent[1]) {
      warnings.push(`fit window [${lo}, ${hi}] lies outside the plotted range`);
    } else {
      const x0 = x(Math.max(lo, tExtent[0]));
      const x1 = x(Math.min(hi, tExtent[1]));
      parts.push(
        `<rect x="${x0.toFixed(2)}" y="${margin.top}" width="${(x1 - x0).toFixed(2)}" height="${innerH}" fill="#dfe8f5" opacity="0.5"/>`,
      );
    }
  }

  // axes with grid
  const axisColor = "#444";
  for (const t of x.ticks(8)) {
    const px = x(t);
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${margin.top}" x2="${px.toFixed(2)}" y2="${margin.top + innerH}" stroke="#eee"/>`,
    );
    const label = x.tickFormat(8, "~g")(t);
    if (label !== "") {
      parts.push(
        `<text x="${px.toFixed(2)}" y="${margin.top + innerH + 18}" text-anchor="middle" font-size="11" fill="${axisColor}">${label}</text>`,
      );
    }
  }
  for (const v of y.ticks(6)) {
    const py = y(v);
    parts.push(
      `<line x1="${margin.left}" y1="${py.toFixed(2)}" x2="${margin.left + innerW}" y2="${py.toFixed(2)}" stroke="#eee"/>`,
    );
    const label = y.tickFormat(6, "~e")(v);
    if (label !== "") {
      parts.push(
        `<text x="${margin.left - 6}" y="${(py + 4).toFixed(2)}" text-anchor="end" font-size="11" fill="${axisColor}">${label}</text>`,
      );
    }
  }
  parts.push(
    `<rect x="${margin.left}" y="${margin.top}" width="${innerW}" height="${innerH}" fill="none" stroke="${axisColor}"/>`,
  );
  parts.push(
    `<text x="${margin.left + innerW / 2}" y="${height - 10}" text-anchor="middle" font-size="12" fill="${axisColor}">t</text>`,
  );
  parts.push(
    `<text x="16" y="${margin.top + innerH / 2}" text-anchor="middle" font-size="12" fill="${axisColor}" transform="rotate(-90 16 ${margin.top + innerH / 2})">norm</text>`,
  );

  const makePath = d3line<Point>()
    .x((p) => x(p.t))
    .y((p) => y(p.v));

  const refLines: RefLine[] = [];
  const legend: LegendEntry[] = [];
  quantities.forEach((q, idx) => {
    const color = schemeCategory10[idx % schemeCategory10.length];
    const pts = seriesPoints.get(q)!;
    parts.push(
      `<path d="${makePath(pts)}" fill="none" stroke="${color}" stroke-width="1.6" data-series="${esc(q)}"/>`,
    );

    const fitted = report?.fits[q]?.exponent;
    const expected = report ? expectedSlope(report, q) : undefined;
    let label = q;
    if (fitted !== undefined) label += ` fit ${fitted.toFixed(3)}`;
    if (expected !== undefined) label += ` (ref ${expected.toFixed(3)})`;
    legend.push({ name: q, label, fitted, expected });

    if (expected !== undefined && window) {
      const [lo, hi] = window;
      const t1 = Math.max(lo, tExtent[0]);
      const t2 = Math.min(hi, tExtent[1]);
      if (t1 < t2) {
        // anchored just above the curve at the window start
        const v1 = valueNear(pts, t1) * 1.35;
        const v2 = v1 * Math.pow(t2 / t1, expected);
        refLines.push({ name: q, slope: expected, t1, v1, t2, v2 });
        parts.push(
          `<line x1="${x(t1).toFixed(3)}" y1="${y(v1).toFixed(3)}" x2="${x(t2).toFixed(3)}" y2="${y(v2).toFixed(3)}" stroke="${color}" stroke-width="1.2" stroke-dasharray="6 4" data-refslope="${expected}" data-series="${esc(q)}"/>`,
        );
      }
    }
  });

  // legend block
  legend.forEach((entry, idx) => {
    const color = schemeCategory10[idx % schemeCategory10.length];
    const ly = margin.top + 14 + 16 * idx;
    const lx = margin.left + 10;
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(
      `<text x="${lx + 28}" y="${ly}" font-size="11" fill="#222" data-legend="${esc(entry.name)}">${esc(entry.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return { svg: parts.join("\n"), refLines, legend, warnings };
}
