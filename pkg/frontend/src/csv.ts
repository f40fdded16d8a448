import { DataError } from "./errors.js";

export interface Table {
  path: string;
  columns: string[];
  rows: string[][];
}

/** Parse a simple comma-separated file (no quoting; the simulator never
 * emits quoted fields). Errors carry the file path so the CLI message
 * points at the offending input. */
export function parseCsv(text: string, path: string): Table {
  const lines = text.split(/\r?\n/).filter((ln) => ln.length > 0);
  if (lines.length === 0) {
    throw new DataError(`empty csv: ${path} has no header row`);
  }
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((ln) => ln.split(","));
  if (rows.length === 0) {
    throw new DataError(`empty csv: ${path} has a header but no data rows`);
  }
  rows.forEach((row, i) => {
    if (row.length !== columns.length) {
      throw new DataError(
        `ragged row ${i + 2} in ${path}: expected ${columns.length} fields, got ${row.length}`,
      );
    }
  });
  return { path, columns, rows };
}

export function columnIndex(table: Table, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new DataError(
      `missing column "${name}" in ${table.path} (have: ${table.columns.join(", ")})`,
    );
  }
  return idx;
}

export function numericColumn(table: Table, name: string): number[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row, i) => {
    const v = Number(row[idx]);
    if (!Number.isFinite(v)) {
      throw new DataError(
        `column "${name}" in ${table.path} has non-numeric value "${row[idx]}" at row ${i + 2}`,
      );
    }
    return v;
  });
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = columnIndex(table, name);
  return table.rows.map((row) => row[idx]);
}
