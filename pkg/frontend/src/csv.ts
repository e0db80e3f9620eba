/**
 * Minimal numeric CSV reading for the simulator's data products (plain
 * comma-separated floats, no quoting).
 */

import { readFileSync } from 'node:fs';

/** A parsed column-oriented table. */
export interface NumericTable {
  columns: string[];
  /** column name -> values, one per data row */
  data: Map<string, number[]>;
  rows: number;
}

function splitLines(text: string): string[] {
  return text.split('\n').filter((line) => line.length > 0);
}

/** Read a CSV with a header row into columns of numbers. */
export function readTable(path: string): NumericTable {
  const lines = splitLines(readFileSync(path, 'utf-8'));
  if (lines.length < 2) {
    throw new Error(`CSV ${path} has no data rows`);
  }
  const columns = lines[0].split(',');
  const data = new Map<string, number[]>(columns.map((c) => [c, []]));
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',');
    if (cells.length !== columns.length) {
      throw new Error(`CSV ${path} row ${i} has ${cells.length} cells, expected ${columns.length}`);
    }
    for (let c = 0; c < columns.length; c++) {
      const value = Number(cells[c]);
      if (!Number.isFinite(value)) {
        throw new Error(`CSV ${path} row ${i} column ${columns[c]} is not a number: ${cells[c]}`);
      }
      data.get(columns[c])!.push(value);
    }
  }
  return { columns, data, rows: lines.length - 1 };
}

/** Read a headerless CSV of floats as a row-major matrix. */
export function readMatrix(path: string): number[][] {
  const lines = splitLines(readFileSync(path, 'utf-8'));
  const matrix = lines.map((line, i) => {
    const row = line.split(',').map(Number);
    if (row.some((v) => !Number.isFinite(v))) {
      throw new Error(`matrix CSV ${path} row ${i} contains a non-number`);
    }
    return row;
  });
  const width = matrix[0]?.length ?? 0;
  if (width === 0 || matrix.some((row) => row.length !== width)) {
    throw new Error(`matrix CSV ${path} is ragged or empty`);
  }
  return matrix;
}
