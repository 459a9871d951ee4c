import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { buildChart } from "../src/chart";
import { parseCsv } from "../src/csv";
import { extractSeries, FIGURES } from "../src/figures";

const DATA = join(__dirname, "..", "testdata");

function planFor(name: keyof typeof FIGURES, file: string) {
  const table = parseCsv(readFileSync(join(DATA, file), "utf8"));
  const series = extractSeries(table, FIGURES[name]);
  return buildChart(series, FIGURES[name]);
}

describe("buildChart", () => {
  it("keeps every point inside the plot frame", () => {
    const plan = planFor("fig2", "fig2.csv");
    for (const series of plan.series) {
      for (const [x, y] of series.points) {
        expect(x).toBeGreaterThanOrEqual(plan.plot.left);
        expect(x).toBeLessThanOrEqual(plan.plot.right);
        expect(y).toBeGreaterThanOrEqual(plan.plot.top);
        expect(y).toBeLessThanOrEqual(plan.plot.bottom);
      }
    }
  });

  it("renders the fig3 FDP series as a flat polyline", () => {
    const plan = planFor("fig3", "fig3.csv");
    const fdp = plan.series.find((s) => s.scheme === "fdp")!;
    const ys = fdp.points.map(([, y]) => y);
    expect(new Set(ys).size).toBe(1);
    const gsm = plan.series.find((s) => s.scheme === "gsm-hp")!;
    expect(new Set(gsm.points.map(([, y]) => y)).size).toBeGreaterThan(1);
  });

  it("x pixels increase with the swept value", () => {
    const plan = planFor("fig4", "fig4.csv");
    for (const series of plan.series) {
      const xs = series.points.map(([x]) => x);
      for (let i = 1; i < xs.length; i++) expect(xs[i]).toBeGreaterThan(xs[i - 1]);
    }
  });

  it("notes the shared exponent on the EE axis", () => {
    const plan = planFor("fig2", "fig2.csv");
    expect(plan.yLabel).toMatch(/x 1e\+\d+$/);
    const fig5 = planFor("fig5", "fig5.csv");
    expect(fig5.yLabel).toBe("Computation power (W)");
  });

  it("tick labels are plain decimals after scaling", () => {
    const plan = planFor("fig2", "fig2.csv");
    for (const tick of [...plan.xTicks, ...plan.yTicks]) {
      expect(tick.label).toMatch(/^-?\d+(\.\d+)?$/);
    }
  });
});
