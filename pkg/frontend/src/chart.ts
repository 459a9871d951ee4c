/** Pure chart geometry: scales, ticks, and pixel polylines (no drawing). */

import { FigureSpec, Rgb, SeriesData } from "./figures";

export interface Tick {
  value: number;
  pixel: number;
  label: string;
}

export interface SeriesPlan extends SeriesData {
  points: Array<[number, number]>;
}

export interface ChartPlan {
  width: number;
  height: number;
  plot: { left: number; top: number; right: number; bottom: number };
  xTicks: Tick[];
  yTicks: Tick[];
  series: SeriesPlan[];
  title: string;
  xLabel: string;
  yLabel: string;
}

const WIDTH = 800;
const HEIGHT = 560;
const MARGIN = { left: 90, right: 30, top: 60, bottom: 70 };

function niceStep(rough: number): number {
  const power = Math.pow(10, Math.floor(Math.log10(rough)));
  const base = rough / power;
  if (base <= 1) return power;
  if (base <= 2) return 2 * power;
  if (base <= 5) return 5 * power;
  return 10 * power;
}

function formatTick(value: number, scale: number): string {
  const scaled = value / scale;
  const rounded = Math.round(scaled * 1000) / 1000;
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

/** Lay one figure's series out in pixel space. */
export function buildChart(series: SeriesData[], spec: FigureSpec): ChartPlan {
  const xs = series.flatMap((s) => s.xs);
  const ys = series.flatMap((s) => s.ys);
  let xMin = Math.min(...xs);
  let xMax = Math.max(...xs);
  if (xMin === xMax) {
    xMin -= 1;
    xMax += 1;
  }
  const yMax = Math.max(...ys, 0) * 1.05 || 1;
  const yMin = 0;

  const plot = {
    left: MARGIN.left, top: MARGIN.top,
    right: WIDTH - MARGIN.right, bottom: HEIGHT - MARGIN.bottom,
  };
  const toX = (v: number) =>
    plot.left + ((v - xMin) / (xMax - xMin)) * (plot.right - plot.left);
  const toY = (v: number) =>
    plot.bottom - ((v - yMin) / (yMax - yMin)) * (plot.bottom - plot.top);

  const xStep = niceStep((xMax - xMin) / 6);
  const xTicks: Tick[] = [];
  for (let v = Math.ceil(xMin / xStep) * xStep; v <= xMax + 1e-9; v += xStep) {
    xTicks.push({ value: v, pixel: Math.round(toX(v)), label: formatTick(v, 1) });
  }

  // large magnitudes share one exponent, noted on the axis label
  const yExponent = yMax >= 1e4 ? Math.floor(Math.log10(yMax)) : 0;
  const yScale = Math.pow(10, yExponent);
  const yStep = niceStep((yMax - yMin) / 5);
  const yTicks: Tick[] = [];
  for (let v = 0; v <= yMax + 1e-9 * yStep; v += yStep) {
    yTicks.push({ value: v, pixel: Math.round(toY(v)), label: formatTick(v, yScale) });
  }

  return {
    width: WIDTH,
    height: HEIGHT,
    plot,
    xTicks,
    yTicks,
    series: series.map((s) => ({
      ...s,
      points: s.xs.map((x, i) => [toX(x), toY(s.ys[i])] as [number, number]),
    })),
    title: spec.title,
    xLabel: spec.xLabel,
    yLabel: yExponent > 0 ? `${spec.yLabel} x 1e+${yExponent}` : spec.yLabel,
  };
}
