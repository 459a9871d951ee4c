/** Which CSV columns each figure plots, and per-scheme series extraction. */

import { CsvError, CsvTable, columnIndex, numberAt, requireSweepSchema } from "./csv";

export interface Rgb { r: number; g: number; b: number }

export interface FigureSpec {
  figureId: 2 | 3 | 4 | 5;
  xColumn: "swept_value";
  yColumn: "ee_bit_per_joule" | "p_computation_w";
  xLabel: string;
  yLabel: string;
  title: string;
}

export const FIGURES: Record<string, FigureSpec> = {
  fig2: {
    figureId: 2, xColumn: "swept_value", yColumn: "ee_bit_per_joule",
    xLabel: "Number of users", yLabel: "Energy efficiency (bit/Joule)",
    title: "Energy efficiency vs number of users",
  },
  fig3: {
    figureId: 3, xColumn: "swept_value", yColumn: "ee_bit_per_joule",
    xLabel: "Number of RF chains", yLabel: "Energy efficiency (bit/Joule)",
    title: "Energy efficiency vs number of RF chains",
  },
  fig4: {
    figureId: 4, xColumn: "swept_value", yColumn: "ee_bit_per_joule",
    xLabel: "Number of antennas per group", yLabel: "Energy efficiency (bit/Joule)",
    title: "Energy efficiency vs antennas per group",
  },
  fig5: {
    figureId: 5, xColumn: "swept_value", yColumn: "p_computation_w",
    xLabel: "Number of users", yLabel: "Computation power (W)",
    title: "Computation power vs number of users",
  },
};

export const SCHEME_COLORS: Record<string, Rgb> = {
  "gsm-hp": { r: 31, g: 119, b: 180 },
  "fdp": { r: 255, g: 127, b: 14 },
};

export interface SeriesData {
  scheme: string;
  color: Rgb;
  xs: number[];
  ys: number[];
}

/**
 * One series per scheme, in first-appearance order; points keep the CSV row
 * order untouched (rendering must not reorder data).
 */
export function extractSeries(table: CsvTable, spec: FigureSpec): SeriesData[] {
  requireSweepSchema(table);
  if (table.rows.length === 0) {
    throw new CsvError("CSV has a header but no data rows");
  }
  const schemeIdx = columnIndex(table, "scheme");
  const byScheme = new Map<string, SeriesData>();
  const order: string[] = [];
  for (const row of table.rows) {
    const scheme = row[schemeIdx];
    let series = byScheme.get(scheme);
    if (!series) {
      series = {
        scheme,
        color: SCHEME_COLORS[scheme] ?? { r: 60, g: 60, b: 60 },
        xs: [], ys: [],
      };
      byScheme.set(scheme, series);
      order.push(scheme);
    }
    series.xs.push(numberAt(table, row, spec.xColumn));
    series.ys.push(numberAt(table, row, spec.yColumn));
  }
  return order.map((scheme) => byScheme.get(scheme)!);
}
