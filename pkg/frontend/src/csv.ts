/** Strict parsing of the three numeric CSV layouts the harness emits. */

export interface ConvergenceRow {
  l: number;
  diffSq: number;
}

export interface SweepTable {
  m: number[];
  cost: number[];
  secondsMean: number[];
  /** one column per estimated coordinate, mse[k][row] */
  mse: number[][];
  mseNames: string[];
}

export interface RecordsTable {
  seconds: number[];
}

export class SchemaError extends Error {}

function splitLines(text: string): string[] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0);
}

function parseNumber(cell: string, where: string): number {
  const value = Number(cell);
  if (cell.trim() === "" || Number.isNaN(value)) {
    throw new SchemaError(`${where}: not a number: "${cell}"`);
  }
  return value;
}

function expectHeader(lines: string[], expected: string, path: string): string[][] {
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file`);
  }
  if (lines[0] !== expected) {
    throw new SchemaError(
      `${path}: schema mismatch, expected header "${expected}", got "${lines[0]}"`
    );
  }
  if (lines.length === 1) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return lines.slice(1).map((line) => line.split(","));
}

export function parseConvergence(text: string, path: string): ConvergenceRow[] {
  const rows = expectHeader(splitLines(text), "l,diff_sq", path);
  return rows.map((cells, i) => {
    if (cells.length !== 2) {
      throw new SchemaError(`${path}: row ${i + 2} has ${cells.length} cells, expected 2`);
    }
    return {
      l: parseNumber(cells[0], `${path} row ${i + 2}`),
      diffSq: parseNumber(cells[1], `${path} row ${i + 2}`),
    };
  });
}

export function parseSweep(text: string, path: string): SweepTable {
  const lines = splitLines(text);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file`);
  }
  const header = lines[0].split(",");
  const fixed = ["M", "cost", "seconds_mean"];
  const okFixed = fixed.every((name, i) => header[i] === name);
  const mseNames = header.slice(3);
  const okMse =
    mseNames.length > 0 && mseNames.every((name, k) => name === `mse_${k + 1}`);
  if (!okFixed || !okMse) {
    throw new SchemaError(
      `${path}: schema mismatch, expected header "M,cost,seconds_mean,mse_1..", got "${lines[0]}"`
    );
  }
  if (lines.length === 1) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const table: SweepTable = {
    m: [],
    cost: [],
    secondsMean: [],
    mse: mseNames.map(() => []),
    mseNames,
  };
  lines.slice(1).forEach((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(
        `${path}: row ${i + 2} has ${cells.length} cells, expected ${header.length}`
      );
    }
    const where = `${path} row ${i + 2}`;
    table.m.push(parseNumber(cells[0], where));
    table.cost.push(parseNumber(cells[1], where));
    table.secondsMean.push(parseNumber(cells[2], where));
    mseNames.forEach((_, k) => table.mse[k].push(parseNumber(cells[3 + k], where)));
  });
  return table;
}

export function parseRecords(text: string, path: string): RecordsTable {
  const lines = splitLines(text);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file`);
  }
  const header = lines[0].split(",");
  const fixed = ["replicate", "seed", "l", "p", "cost", "seconds"];
  const okFixed = fixed.every((name, i) => header[i] === name);
  const thetaNames = header.slice(6);
  const okTheta =
    thetaNames.length > 0 && thetaNames.every((name, k) => name === `theta_${k + 1}`);
  if (!okFixed || !okTheta) {
    throw new SchemaError(
      `${path}: schema mismatch, expected header "replicate,seed,l,p,cost,seconds,theta_1..", got "${lines[0]}"`
    );
  }
  if (lines.length === 1) {
    throw new SchemaError(`${path}: no data rows`);
  }
  const seconds = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(
        `${path}: row ${i + 2} has ${cells.length} cells, expected ${header.length}`
      );
    }
    return parseNumber(cells[5], `${path} row ${i + 2}`);
  });
  return { seconds };
}
