#!/usr/bin/env node
/** plot <kind> <in.csv> <out.png> */

import { readFileSync, writeFileSync } from "fs";

import { FIGURE_KINDS, FigureKind } from "./charts";
import { buildChart, renderPng } from "./render";

export function main(argv: string[]): number {
  if (argv.length !== 3) {
    process.stderr.write(`usage: plot <${FIGURE_KINDS.join("|")}> <in.csv> <out.png>\n`);
    return 2;
  }
  const [kind, input, output] = argv;
  if (!FIGURE_KINDS.includes(kind as FigureKind)) {
    process.stderr.write(
      `unknown figure kind "${kind}", expected one of: ${FIGURE_KINDS.join(", ")}\n`
    );
    return 2;
  }
  let csvText: string;
  try {
    csvText = readFileSync(input, "utf8");
  } catch (err) {
    process.stderr.write(`cannot read ${input}: ${(err as Error).message}\n`);
    return 1;
  }
  try {
    const chart = buildChart(kind as FigureKind, csvText, input);
    writeFileSync(output, renderPng(chart.svg));
    if (chart.slopes) {
      chart.slopes.forEach((slope, k) =>
        process.stdout.write(`fitted slope (mse_${k + 1}): ${slope.toFixed(4)}\n`)
      );
    }
    process.stdout.write(`wrote ${output}\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    return 1;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
