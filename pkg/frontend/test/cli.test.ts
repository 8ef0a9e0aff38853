import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { main } from "../src/cli";

const fixtures = join(__dirname, "fixtures");

describe("plot command", () => {
  it("renders every kind end to end", () => {
    const out = mkdtempSync(join(tmpdir(), "plots-"));
    const jobs: Array<[string, string]> = [
      ["convergence-semilog", "convergence.csv"],
      ["mse-vs-cost-loglog", "sweep.csv"],
      ["timing-box", "records.csv"],
    ];
    for (const [kind, name] of jobs) {
      const target = join(out, `${kind}.png`);
      expect(main([kind, join(fixtures, name), target])).toBe(0);
      const png = readFileSync(target);
      expect(Array.from(png.subarray(0, 4))).toEqual([0x89, 0x50, 0x4e, 0x47]);
    }
  });

  it("fails with a descriptive message on a schema mismatch", () => {
    const out = mkdtempSync(join(tmpdir(), "plots-"));
    const bad = join(out, "bad.csv");
    writeFileSync(bad, "wrong,header\n1,2\n");
    expect(main(["convergence-semilog", bad, join(out, "x.png")])).toBe(1);
  });

  it("rejects unknown kinds and bad usage", () => {
    expect(main(["histogram", "a.csv", "b.png"])).toBe(2);
    expect(main(["convergence-semilog"])).toBe(2);
  });
});
