/** Strict parsing of the sweep CSV schema. */

export class CsvError extends Error {}

/** The fixed column schema the sweep engine writes. */
export const SWEEP_COLUMNS = [
  "sweep_kind", "swept_value", "scheme", "n_drops", "r_total_bps",
  "ee_bit_per_joule", "p_pa_w", "p_rf_w", "p_switch_w", "p_transmission_w",
  "p_ce_w", "p_cd_w", "p_bb_w", "p_lp_c_w", "p_computation_w", "p_fix_w",
  "p_total_w", "singular_redraws",
] as const;

export interface CsvTable {
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split("\n").map((line) => line.replace(/\r$/, ""));
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) throw new CsvError("CSV file is empty");
  const columns = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== columns.length) {
      throw new CsvError(
        `row ${i + 1} has ${cells.length} cells, header has ${columns.length}`);
    }
    return cells;
  });
  return { columns, rows };
}

/** Reject tables that do not carry every sweep-schema column. */
export function requireSweepSchema(table: CsvTable): void {
  const missing = SWEEP_COLUMNS.filter((c) => !table.columns.includes(c));
  if (missing.length > 0) {
    throw new CsvError(`missing column(s): ${missing.join(", ")}`);
  }
}

export function columnIndex(table: CsvTable, column: string): number {
  const index = table.columns.indexOf(column);
  if (index < 0) throw new CsvError(`missing column(s): ${column}`);
  return index;
}

export function numberAt(table: CsvTable, row: string[], column: string): number {
  const raw = row[columnIndex(table, column)];
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    throw new CsvError(`column ${column}: not a finite number: ${JSON.stringify(raw)}`);
  }
  return value;
}
