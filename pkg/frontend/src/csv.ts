/**
 * Parser for the fixed result-CSV schema produced by the clinr CLI.
 *
 * The renderer never recomputes statistics: rows carry p_log estimates and
 * Wilson confidence bounds, and figures plot exactly those values.
 */

export const REQUIRED_COLUMNS = [
  'mode', 'n', 'alpha', 's', 't', 'r', 'p2', 'p1', 'shots', 'seed',
  'circuit_idx', 'plog', 'ci_lo', 'ci_hi', 'mean_ops', 'omega_g',
  'restart_rate', 'aborts',
] as const;

export interface ResultRow {
  mode: string;
  n: number;
  alpha: number | null;
  s: number;
  t: number | null;
  r: number | null;
  p2: number;
  p1: number;
  shots: number;
  seed: string;
  circuitIdx: number;
  plog: number;
  ciLo: number;
  ciHi: number;
  meanOps: number;
  omegaG: number;
  restartRate: number;
  aborts: number;
}

export class CsvSchemaError extends Error {}

function parseOptionalNumber(text: string): number | null {
  return text === '' ? null : Number(text);
}

export function parseResultCsv(text: string): ResultRow[] {
  const lines = text.split(/\r?\n/).filter((line) => line.trim() !== '');
  if (lines.length === 0) {
    throw new CsvSchemaError('empty CSV: no header row');
  }
  const header = lines[0].split(',');
  const missing = REQUIRED_COLUMNS.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new CsvSchemaError(`missing required columns: ${missing.join(', ')}`);
  }
  const idx = new Map(header.map((name, i) => [name, i]));
  const col = (fields: string[], name: string): string =>
    fields[idx.get(name) as number] ?? '';

  const rows: ResultRow[] = [];
  for (let lineNo = 1; lineNo < lines.length; lineNo++) {
    const fields = lines[lineNo].split(',');
    if (fields.length !== header.length) {
      throw new CsvSchemaError(
        `line ${lineNo + 1}: expected ${header.length} fields, got ${fields.length}`,
      );
    }
    rows.push({
      mode: col(fields, 'mode'),
      n: Number(col(fields, 'n')),
      alpha: parseOptionalNumber(col(fields, 'alpha')),
      s: Number(col(fields, 's')),
      t: parseOptionalNumber(col(fields, 't')),
      r: parseOptionalNumber(col(fields, 'r')),
      p2: Number(col(fields, 'p2')),
      p1: Number(col(fields, 'p1')),
      shots: Number(col(fields, 'shots')),
      seed: col(fields, 'seed'),
      circuitIdx: Number(col(fields, 'circuit_idx')),
      plog: Number(col(fields, 'plog')),
      ciLo: Number(col(fields, 'ci_lo')),
      ciHi: Number(col(fields, 'ci_hi')),
      meanOps: Number(col(fields, 'mean_ops')),
      omegaG: Number(col(fields, 'omega_g')),
      restartRate: Number(col(fields, 'restart_rate')),
      aborts: Number(col(fields, 'aborts')),
    });
  }
  if (rows.length === 0) {
    throw new CsvSchemaError('CSV has a header but no data rows');
  }
  return rows;
}

/** Aggregate rows carry circuit_idx = -1 and hold the pooled estimates. */
export function aggregateRows(rows: ResultRow[]): ResultRow[] {
  return rows.filter((r) => r.circuitIdx === -1);
}
