/** Wire CSV -> series -> chart -> PNG, and the shared script entry point. */

import { readFileSync, writeFileSync } from "node:fs";

import { buildChart, ChartPlan } from "./chart";
import { CsvError, parseCsv } from "./csv";
import { extractSeries, FIGURES, FigureSpec } from "./figures";
import { renderChart } from "./raster";

export interface RenderedFigure {
  plan: ChartPlan;
  png: Buffer;
}

export function renderFigure(figureId: 2 | 3 | 4 | 5, csvText: string): RenderedFigure {
  const spec: FigureSpec = FIGURES[`fig${figureId}`];
  const series = extractSeries(parseCsv(csvText), spec);
  const plan = buildChart(series, spec);
  return { plan, png: renderChart(plan) };
}

/**
 * Entry point for the per-figure scripts: `figN <csv> <out.png>`.
 * Returns the process exit code; nothing is written unless rendering
 * succeeded end to end.
 */
export function runFigureScript(figureId: 2 | 3 | 4 | 5, argv: string[]): number {
  if (argv.length !== 2) {
    console.error(`usage: fig${figureId} <sweep.csv> <out.png>`);
    return 2;
  }
  const [csvPath, outPath] = argv;
  let text: string;
  try {
    text = readFileSync(csvPath, "utf8");
  } catch (error) {
    console.error(`error: cannot read ${csvPath}: ${(error as Error).message}`);
    return 1;
  }
  try {
    const { png } = renderFigure(figureId, text);
    writeFileSync(outPath, png);
  } catch (error) {
    if (error instanceof CsvError) {
      console.error(`error: ${csvPath}: ${error.message}`);
      return 1;
    }
    console.error(`error: ${(error as Error).message}`);
    return 1;
  }
  return 0;
}
