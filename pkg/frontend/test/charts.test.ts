import { readFileSync } from "fs";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { FIGURE_KINDS } from "../src/charts";
import { buildChart, renderPng } from "../src/render";

const fixture = (name: string) => readFileSync(join(__dirname, "fixtures", name), "utf8");

const FIXTURE_BY_KIND = {
  "convergence-semilog": "convergence.csv",
  "mse-vs-cost-loglog": "sweep.csv",
  "timing-box": "records.csv",
} as const;

function powerLawSweep(): string {
  // exact MSE = 1e6 / cost
  const lines = ["M,cost,seconds_mean,mse_1"];
  for (let k = 0; k < 7; k++) {
    const cost = Math.pow(10, 2 + 0.5 * k);
    lines.push(`${2 ** (2 + k)},${cost},0.1,${1e6 / cost}`);
  }
  return lines.join("\n") + "\n";
}

describe("slope fidelity", () => {
  it("fits -1.00 within 0.01 on an exact power law", () => {
    const chart = buildChart("mse-vs-cost-loglog", powerLawSweep(), "synthetic.csv");
    expect(chart.slopes).toHaveLength(1);
    expect(Math.abs(chart.slopes![0] - -1.0)).toBeLessThanOrEqual(0.01);
    expect(chart.svg).toContain("slope -1.00");
  });
});

describe("rendering from harness outputs", () => {
  for (const kind of FIGURE_KINDS) {
    it(`renders ${kind} without error`, () => {
      const name = FIXTURE_BY_KIND[kind];
      const chart = buildChart(kind, fixture(name), name);
      const png = renderPng(chart.svg);
      // PNG magic bytes
      expect(Array.from(png.subarray(0, 4))).toEqual([0x89, 0x50, 0x4e, 0x47]);
      expect(png.length).toBeGreaterThan(1000);
    });
  }
});

describe("convergence-semilog geometry", () => {
  it("monotone decreasing data gives a monotone decreasing curve", () => {
    const chart = buildChart("convergence-semilog", fixture("convergence.csv"), "c.csv");
    const match = chart.svg.match(/<polyline points="([^"]+)"/);
    expect(match).not.toBeNull();
    const ys = match![1].split(" ").map((pair) => Number(pair.split(",")[1]));
    // pixel y grows downward, so decreasing values mean increasing y
    for (let i = 1; i < ys.length; i++) {
      expect(ys[i]).toBeGreaterThan(ys[i - 1]);
    }
  });

  it("rejects data with no positive values", () => {
    expect(() =>
      buildChart("convergence-semilog", "l,diff_sq\n3,0\n4,0\n", "zero.csv")
    ).toThrow(/no positive diff_sq values/);
  });
});

describe("timing-box", () => {
  it("degenerates to a zero-height box on constant seconds", () => {
    const lines = ["replicate,seed,l,p,cost,seconds,theta_1"];
    for (let i = 0; i < 8; i++) {
      lines.push(`${i},${i},2,0,4,0.25,100.0`);
    }
    const chart = buildChart("timing-box", lines.join("\n") + "\n", "const.csv");
    expect(chart.timing!.q3 - chart.timing!.q1).toBe(0);
    expect(chart.svg).toMatch(/height="0\.00"/);
  });
});

describe("determinism", () => {
  it("same CSV bytes give identical PNG bytes", () => {
    for (const kind of FIGURE_KINDS) {
      const name = FIXTURE_BY_KIND[kind];
      const a = renderPng(buildChart(kind, fixture(name), name).svg);
      const b = renderPng(buildChart(kind, fixture(name), name).svg);
      expect(Buffer.compare(a, b)).toBe(0);
    }
  });
});
