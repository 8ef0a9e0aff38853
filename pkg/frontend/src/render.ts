/** CSV text to chart, and SVG to PNG with a pinned font for byte-stable output. */

import { existsSync } from "fs";
import { Resvg } from "@resvg/resvg-js";

import { Chart, FigureKind } from "./charts";
import { convergenceSemilog, mseVsCostLoglog, timingBox } from "./charts";
import { parseConvergence, parseRecords, parseSweep } from "./csv";

const PINNED_FONTS = [
  "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
  "/usr/share/fonts/dejavu/DejaVuSans.ttf",
];

export function buildChart(kind: FigureKind, csvText: string, path: string): Chart {
  switch (kind) {
    case "convergence-semilog":
      return convergenceSemilog(parseConvergence(csvText, path));
    case "mse-vs-cost-loglog":
      return mseVsCostLoglog(parseSweep(csvText, path));
    case "timing-box":
      return timingBox(parseRecords(csvText, path));
    default:
      throw new Error(`unknown figure kind "${kind}"`);
  }
}

export function renderPng(svg: string): Buffer {
  const fontFile = PINNED_FONTS.find((p) => existsSync(p));
  const resvg = new Resvg(svg, {
    background: "white",
    font: fontFile
      ? { fontFiles: [fontFile], loadSystemFonts: false, defaultFontFamily: "DejaVu Sans" }
      : { loadSystemFonts: true },
  });
  return resvg.render().asPng();
}
