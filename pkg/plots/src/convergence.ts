/** Log-log error-vs-parameter plot with an annotated least-squares slope. */

import { FormatError, readSweep } from "./csv";
import { fitLogLogSlope } from "./fit";
import { BLACK, BLUE, GREY, Raster, fmtNumber } from "./raster";
import { textWidth } from "./font";

const MARGIN = { left: 70, right: 30, top: 30, bottom: 50 };
const PLOT_W = 420;
const PLOT_H = 320;

export interface ConvergenceResult {
  /** least-squares slope, or null for a single-point sweep */
  slope: number | null;
}

export function renderConvergence(csvPath: string, outPath: string): ConvergenceResult {
  const sweep = readSweep(csvPath);
  if (sweep.errors.some((e) => e <= 0)) {
    throw new FormatError(`${csvPath}: errors must be positive for a log-log plot`);
  }
  const img = new Raster(MARGIN.left + PLOT_W + MARGIN.right,
                         MARGIN.top + PLOT_H + MARGIN.bottom);
  const x0 = MARGIN.left;
  const y0 = MARGIN.top;

  const lx = sweep.values.map(Math.log);
  const ly = sweep.errors.map(Math.log);
  const pad = (lo: number, hi: number): [number, number] => {
    const span = hi - lo || 1;
    return [lo - 0.08 * span, hi + 0.08 * span];
  };
  const [xlo, xhi] = pad(Math.min(...lx), Math.max(...lx));
  const [ylo, yhi] = pad(Math.min(...ly), Math.max(...ly));
  const px = (v: number) => x0 + ((v - xlo) / (xhi - xlo)) * PLOT_W;
  const py = (v: number) => y0 + PLOT_H - ((v - ylo) / (yhi - ylo)) * PLOT_H;

  img.line(x0, y0, x0, y0 + PLOT_H, BLACK);
  img.line(x0, y0 + PLOT_H, x0 + PLOT_W, y0 + PLOT_H, BLACK);
  img.line(x0 + PLOT_W, y0, x0 + PLOT_W, y0 + PLOT_H, GREY);
  img.line(x0, y0, x0 + PLOT_W, y0, GREY);

  const order = sweep.values.map((_, i) => i).sort((a, b) => lx[a] - lx[b]);
  for (let k = 1; k < order.length; k++) {
    img.line(px(lx[order[k - 1]]), py(ly[order[k - 1]]),
             px(lx[order[k]]), py(ly[order[k]]), BLUE);
  }
  for (const i of order) img.marker(px(lx[i]), py(ly[i]), 5, BLUE);

  // axis extremes and names
  img.text(x0, y0 + PLOT_H + 8, fmtNumber(sweep.values[order[0]]));
  const xmax = fmtNumber(sweep.values[order[order.length - 1]]);
  img.text(x0 + PLOT_W - textWidth(xmax), y0 + PLOT_H + 8, xmax);
  img.text(x0 + Math.floor(PLOT_W / 2) - textWidth(sweep.param), y0 + PLOT_H + 24,
           sweep.param, BLACK, 2);
  const sortedErr = [...sweep.errors].sort((a, b) => a - b);
  img.text(4, y0 + PLOT_H - 7, fmtNumber(sortedErr[0]));
  img.text(4, y0, fmtNumber(sortedErr[sortedErr.length - 1]));
  img.text(4, y0 + Math.floor(PLOT_H / 2) - 7, "error", BLACK, 1);

  let slope: number | null = null;
  if (sweep.values.length >= 2) {
    slope = fitLogLogSlope(sweep.values, sweep.errors);
    const label = `slope=${slope.toFixed(3)}`;
    img.text(x0 + PLOT_W - textWidth(label, 2) - 6, y0 + 8, label, BLACK, 2);
  }
  img.savePng(outPath);
  return { slope };
}
