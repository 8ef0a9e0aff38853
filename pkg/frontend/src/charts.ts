/** Deterministic SVG figures in a pinned style (no DOM, no randomness). */

import { ConvergenceRow, RecordsTable, SweepTable } from "./csv";
import { leastSquaresSlope, quartiles } from "./fit";

export const WIDTH = 640;
export const HEIGHT = 400;
const MARGIN = { left: 80, right: 24, top: 34, bottom: 52 };
const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const FONT = "DejaVu Sans";

const plotLeft = MARGIN.left;
const plotRight = WIDTH - MARGIN.right;
const plotTop = MARGIN.top;
const plotBottom = HEIGHT - MARGIN.bottom;

type Scale = (value: number) => number;

function linearScale(lo: number, hi: number, rLo: number, rHi: number): Scale {
  const span = hi - lo || 1;
  return (v) => rLo + ((v - lo) / span) * (rHi - rLo);
}

function log10Scale(lo: number, hi: number, rLo: number, rHi: number): Scale {
  const inner = linearScale(Math.log10(lo), Math.log10(hi), rLo, rHi);
  return (v) => inner(Math.log10(v));
}

function fmt(v: number): string {
  return v.toFixed(2);
}

function fmtTick(v: number): string {
  const a = Math.abs(v);
  if (a !== 0 && (a >= 1e4 || a < 1e-3)) {
    return v.toExponential(0).replace("+", "");
  }
  return String(Math.round(v * 1e6) / 1e6);
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let k = Math.ceil(Math.log10(lo) - 1e-9); k <= Math.floor(Math.log10(hi) + 1e-9); k++) {
    ticks.push(Math.pow(10, k));
  }
  if (ticks.length < 2) {
    return [lo, hi];
  }
  return ticks;
}

function linearTicks(lo: number, hi: number, count = 6): number[] {
  const span = hi - lo || 1;
  const raw = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= count) ?? mag * 10;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * span; v += step) {
    ticks.push(Math.round(v * 1e9) / 1e9);
  }
  return ticks;
}

function positiveRange(values: number[], what: string): [number, number] {
  const positive = values.filter((v) => v > 0);
  if (positive.length === 0) {
    throw new Error(`cannot draw a log axis: no positive ${what} values`);
  }
  return [Math.min(...positive), Math.max(...positive)];
}

interface AxisSpec {
  ticks: number[];
  scale: Scale;
}

function svgDocument(body: string[], title: string): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${(plotLeft + plotRight) / 2}" y="20" font-family="${FONT}" font-size="14" text-anchor="middle">${title}</text>`,
    ...body,
    "</svg>",
  ].join("\n");
}

function axes(x: AxisSpec, y: AxisSpec, xLabel: string, yLabel: string): string[] {
  const parts: string[] = [];
  parts.push(
    `<rect x="${plotLeft}" y="${plotTop}" width="${plotRight - plotLeft}" height="${plotBottom - plotTop}" fill="none" stroke="black" stroke-width="1"/>`
  );
  for (const t of x.ticks) {
    const px = fmt(x.scale(t));
    parts.push(
      `<line x1="${px}" y1="${plotBottom}" x2="${px}" y2="${plotBottom + 5}" stroke="black"/>`,
      `<text x="${px}" y="${plotBottom + 20}" font-family="${FONT}" font-size="11" text-anchor="middle">${fmtTick(t)}</text>`
    );
  }
  for (const t of y.ticks) {
    const py = fmt(y.scale(t));
    parts.push(
      `<line x1="${plotLeft - 5}" y1="${py}" x2="${plotLeft}" y2="${py}" stroke="black"/>`,
      `<text x="${plotLeft - 8}" y="${py}" font-family="${FONT}" font-size="11" text-anchor="end" dominant-baseline="middle">${fmtTick(t)}</text>`
    );
  }
  parts.push(
    `<text x="${(plotLeft + plotRight) / 2}" y="${HEIGHT - 12}" font-family="${FONT}" font-size="12" text-anchor="middle">${xLabel}</text>`,
    `<text x="18" y="${(plotTop + plotBottom) / 2}" font-family="${FONT}" font-size="12" text-anchor="middle" transform="rotate(-90 18 ${(plotTop + plotBottom) / 2})">${yLabel}</text>`
  );
  return parts;
}

function polyline(xs: number[], ys: number[], xScale: Scale, yScale: Scale, color: string): string[] {
  const points = xs.map((x, i) => `${fmt(xScale(x))},${fmt(yScale(ys[i]))}`).join(" ");
  const markers = xs.map(
    (x, i) =>
      `<circle cx="${fmt(xScale(x))}" cy="${fmt(yScale(ys[i]))}" r="3" fill="${color}"/>`
  );
  return [
    `<polyline points="${points}" fill="none" stroke="${color}" stroke-width="1.5"/>`,
    ...markers,
  ];
}

export interface Chart {
  svg: string;
  /** fitted log-log slope per series (mse-vs-cost only) */
  slopes?: number[];
  /** five-number summary of the timing column (timing-box only) */
  timing?: ReturnType<typeof quartiles>;
}

export function convergenceSemilog(rows: ConvergenceRow[]): Chart {
  const levels = rows.map((r) => r.l);
  const diffs = rows.map((r) => r.diffSq);
  const [yLo, yHi] = positiveRange(diffs, "diff_sq");
  const x: AxisSpec = {
    ticks: levels,
    scale: linearScale(Math.min(...levels), Math.max(...levels), plotLeft, plotRight),
  };
  const y: AxisSpec = {
    ticks: decadeTicks(yLo, yHi),
    scale: log10Scale(yLo, yHi, plotBottom, plotTop),
  };
  const body = [
    ...axes(x, y, "level", "squared consecutive-level difference"),
    ...polyline(levels, diffs, x.scale, y.scale, SERIES_COLORS[0]),
  ];
  return { svg: svgDocument(body, "forward-model convergence") };
}

export function mseVsCostLoglog(table: SweepTable): Chart {
  const [xLo, xHi] = positiveRange(table.cost, "cost");
  const allMse = table.mse.flat();
  const [yLo, yHi] = positiveRange(allMse, "mse");
  const x: AxisSpec = { ticks: decadeTicks(xLo, xHi), scale: log10Scale(xLo, xHi, plotLeft, plotRight) };
  const y: AxisSpec = { ticks: decadeTicks(yLo, yHi), scale: log10Scale(yLo, yHi, plotBottom, plotTop) };
  const body = axes(x, y, "cost (level-0 step units)", "mean squared error");
  const slopes: number[] = [];
  const logCost = table.cost.map(Math.log10);
  table.mse.forEach((series, k) => {
    const color = SERIES_COLORS[k % SERIES_COLORS.length];
    body.push(...polyline(table.cost, series, x.scale, y.scale, color));
    const slope = leastSquaresSlope(logCost, series.map(Math.log10));
    slopes.push(slope);
    body.push(
      `<text x="${plotRight - 8}" y="${plotTop + 16 + 16 * k}" font-family="${FONT}" font-size="12" text-anchor="end" fill="${color}">${table.mseNames[k]}: slope ${slope.toFixed(2)}</text>`
    );
  });
  return { svg: svgDocument(body, "estimator error versus computational cost"), slopes };
}

export function timingBox(records: RecordsTable): Chart {
  const stats = quartiles(records.seconds);
  const pad = Math.max((stats.max - stats.min) * 0.15, stats.max * 0.05, 1e-9);
  const yLo = Math.max(stats.min - pad, 0);
  const yHi = stats.max + pad;
  const y: AxisSpec = {
    ticks: linearTicks(yLo, yHi),
    scale: linearScale(yLo, yHi, plotBottom, plotTop),
  };
  const cx = (plotLeft + plotRight) / 2;
  const half = 70;
  const s = y.scale;
  const body = [
    ...axes({ ticks: [], scale: linearScale(0, 1, plotLeft, plotRight) }, y, "", "seconds per replicate"),
    // whiskers span the full spread
    `<line x1="${cx}" y1="${fmt(s(stats.min))}" x2="${cx}" y2="${fmt(s(stats.q1))}" stroke="black"/>`,
    `<line x1="${cx}" y1="${fmt(s(stats.q3))}" x2="${cx}" y2="${fmt(s(stats.max))}" stroke="black"/>`,
    `<line x1="${cx - 30}" y1="${fmt(s(stats.min))}" x2="${cx + 30}" y2="${fmt(s(stats.min))}" stroke="black"/>`,
    `<line x1="${cx - 30}" y1="${fmt(s(stats.max))}" x2="${cx + 30}" y2="${fmt(s(stats.max))}" stroke="black"/>`,
    `<rect x="${cx - half}" y="${fmt(s(stats.q3))}" width="${2 * half}" height="${fmt(s(stats.q1) - s(stats.q3))}" fill="#aec7e8" stroke="black"/>`,
    `<line x1="${cx - half}" y1="${fmt(s(stats.median))}" x2="${cx + half}" y2="${fmt(s(stats.median))}" stroke="black" stroke-width="2"/>`,
    `<text x="${cx}" y="${plotBottom + 20}" font-family="${FONT}" font-size="11" text-anchor="middle">UMSA</text>`,
    `<text x="${plotRight - 8}" y="${plotTop + 16}" font-family="${FONT}" font-size="12" text-anchor="end">UMSA only (no baseline)</text>`,
  ];
  return { svg: svgDocument(body, "replicate computation times"), timing: stats };
}

export type FigureKind = "convergence-semilog" | "mse-vs-cost-loglog" | "timing-box";

export const FIGURE_KINDS: FigureKind[] = [
  "convergence-semilog",
  "mse-vs-cost-loglog",
  "timing-box",
];
