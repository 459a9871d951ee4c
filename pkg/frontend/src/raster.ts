/** Rasterize a chart plan onto an RGBA buffer and encode it as PNG. */

import { ChartPlan } from "./chart";
import { Rgb } from "./figures";
import { GLYPH_HEIGHT, GLYPH_WIDTH, glyph, textWidth } from "./font";
import { encodePng } from "./png";

const WHITE: Rgb = { r: 255, g: 255, b: 255 };
const BLACK: Rgb = { r: 0, g: 0, b: 0 };
const GRID: Rgb = { r: 210, g: 210, b: 210 };

export class Canvas {
  readonly data: Uint8Array;

  constructor(readonly width: number, readonly height: number) {
    this.data = new Uint8Array(width * height * 4);
    this.fill(WHITE);
  }

  fill(color: Rgb): void {
    for (let i = 0; i < this.data.length; i += 4) {
      this.data[i] = color.r;
      this.data[i + 1] = color.g;
      this.data[i + 2] = color.b;
      this.data[i + 3] = 255;
    }
  }

  set(x: number, y: number, color: Rgb): void {
    x = Math.round(x);
    y = Math.round(y);
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    this.data[i] = color.r;
    this.data[i + 1] = color.g;
    this.data[i + 2] = color.b;
    this.data[i + 3] = 255;
  }

  fillRect(x0: number, y0: number, w: number, h: number, color: Rgb): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) this.set(x, y, color);
    }
  }

  /** Bresenham segment with square brush `thickness` pixels wide. */
  line(x0: number, y0: number, x1: number, y1: number, color: Rgb, thickness = 1): void {
    let ix0 = Math.round(x0);
    let iy0 = Math.round(y0);
    const ix1 = Math.round(x1);
    const iy1 = Math.round(y1);
    const dx = Math.abs(ix1 - ix0);
    const dy = -Math.abs(iy1 - iy0);
    const sx = ix0 < ix1 ? 1 : -1;
    const sy = iy0 < iy1 ? 1 : -1;
    let err = dx + dy;
    const pad = Math.floor(thickness / 2);
    for (;;) {
      for (let oy = -pad; oy < thickness - pad; oy++) {
        for (let ox = -pad; ox < thickness - pad; ox++) {
          this.set(ix0 + ox, iy0 + oy, color);
        }
      }
      if (ix0 === ix1 && iy0 === iy1) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        ix0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        iy0 += sy;
      }
    }
  }

  marker(x: number, y: number, color: Rgb, size = 6): void {
    this.fillRect(Math.round(x) - size / 2, Math.round(y) - size / 2, size, size, color);
  }

  text(x: number, y: number, content: string, color: Rgb, scale = 2): void {
    let cx = Math.round(x);
    const cy = Math.round(y);
    for (const char of content) {
      const rows = glyph(char);
      for (let gy = 0; gy < GLYPH_HEIGHT; gy++) {
        for (let gx = 0; gx < GLYPH_WIDTH; gx++) {
          if (rows[gy][gx] !== "#") continue;
          this.fillRect(cx + gx * scale, cy + gy * scale, scale, scale, color);
        }
      }
      cx += (GLYPH_WIDTH + 1) * scale;
    }
  }

  textCentered(xCenter: number, y: number, content: string, color: Rgb, scale = 2): void {
    this.text(xCenter - textWidth(content, scale) / 2, y, content, color, scale);
  }

  toPng(): Buffer {
    return encodePng(this.width, this.height, this.data);
  }
}

/** Draw the complete figure: axes, grid, ticks, series, legend. */
export function renderChart(plan: ChartPlan): Buffer {
  const canvas = new Canvas(plan.width, plan.height);
  const { plot } = plan;

  canvas.textCentered((plot.left + plot.right) / 2, 14, plan.title, BLACK, 2);
  canvas.text(8, plot.top - 26, plan.yLabel, BLACK, 2);

  for (const tick of plan.yTicks) {
    canvas.line(plot.left, tick.pixel, plot.right, tick.pixel, GRID, 1);
  }
  // axes frame
  canvas.line(plot.left, plot.top, plot.left, plot.bottom, BLACK, 1);
  canvas.line(plot.left, plot.bottom, plot.right, plot.bottom, BLACK, 1);
  canvas.line(plot.right, plot.top, plot.right, plot.bottom, BLACK, 1);
  canvas.line(plot.left, plot.top, plot.right, plot.top, BLACK, 1);

  for (const tick of plan.xTicks) {
    canvas.line(tick.pixel, plot.bottom, tick.pixel, plot.bottom + 5, BLACK, 1);
    canvas.textCentered(tick.pixel, plot.bottom + 10, tick.label, BLACK, 2);
  }
  for (const tick of plan.yTicks) {
    canvas.line(plot.left - 5, tick.pixel, plot.left, tick.pixel, BLACK, 1);
    canvas.text(plot.left - 10 - textWidth(tick.label, 2), tick.pixel - 7,
                tick.label, BLACK, 2);
  }
  canvas.textCentered((plot.left + plot.right) / 2, plot.bottom + 36,
                      plan.xLabel, BLACK, 2);

  for (const series of plan.series) {
    for (let i = 1; i < series.points.length; i++) {
      const [x0, y0] = series.points[i - 1];
      const [x1, y1] = series.points[i];
      canvas.line(x0, y0, x1, y1, series.color, 2);
    }
    for (const [x, y] of series.points) {
      canvas.marker(x, y, series.color);
    }
  }

  // legend, top-right inside the frame
  const legendX = plot.right - 150;
  let legendY = plot.top + 10;
  for (const series of plan.series) {
    canvas.line(legendX, legendY + 6, legendX + 30, legendY + 6, series.color, 2);
    canvas.marker(legendX + 15, legendY + 6, series.color);
    canvas.text(legendX + 38, legendY, series.scheme, BLACK, 2);
    legendY += 22;
  }

  return canvas.toPng();
}
