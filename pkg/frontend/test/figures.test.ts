import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { columnIndex, CsvError, parseCsv } from "../src/csv";
import { extractSeries, FIGURES } from "../src/figures";

const DATA = join(__dirname, "..", "testdata");

function goldenTable(name: string) {
  return parseCsv(readFileSync(join(DATA, name), "utf8"));
}

describe("extractSeries", () => {
  it("splits rows into one series per scheme", () => {
    const table = goldenTable("fig2.csv");
    const series = extractSeries(table, FIGURES.fig2);
    expect(series.map((s) => s.scheme)).toEqual(["gsm-hp", "fdp"]);
    expect(series[0].xs.length + series[1].xs.length).toBe(table.rows.length);
  });

  it("preserves row order and values exactly (no reordering, no mutation)", () => {
    const table = goldenTable("fig5.csv");
    const spec = FIGURES.fig5;
    const series = extractSeries(table, spec);
    const xIdx = columnIndex(table, spec.xColumn);
    const yIdx = columnIndex(table, spec.yColumn);
    const schemeIdx = columnIndex(table, "scheme");
    const seen: Record<string, number> = {};
    for (const row of table.rows) {
      const s = series.find((e) => e.scheme === row[schemeIdx])!;
      const i = seen[s.scheme] ?? 0;
      expect(s.xs[i]).toBe(Number(row[xIdx]));
      expect(s.ys[i]).toBe(Number(row[yIdx]));
      seen[s.scheme] = i + 1;
    }
  });

  it("fig5 selects the computation-power column", () => {
    const series = extractSeries(goldenTable("fig5.csv"), FIGURES.fig5);
    const gsm = series.find((s) => s.scheme === "gsm-hp")!;
    expect(Math.max(...gsm.ys)).toBeLessThan(1e3); // Watts, not bit/Joule
  });

  it("fig3 FDP data is constant", () => {
    const series = extractSeries(goldenTable("fig3.csv"), FIGURES.fig3);
    const fdp = series.find((s) => s.scheme === "fdp")!;
    expect(new Set(fdp.ys).size).toBe(1);
  });

  it("rejects data-free tables", () => {
    const table = goldenTable("empty.csv");
    expect(() => extractSeries(table, FIGURES.fig2)).toThrow(CsvError);
  });
});
