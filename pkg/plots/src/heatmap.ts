/** Probability-density heatmap of a 2-d snapshot CSV. */

import { readSnapshot } from "./csv";
import { normalize, viridis } from "./colormap";
import { BLACK, GREY, Raster, fmtNumber, WHITE } from "./raster";
import { textWidth } from "./font";

export interface HeatmapOptions {
  logScale?: boolean;
}

const MARGIN = { left: 56, right: 84, top: 28, bottom: 44 };

export function renderHeatmap(csvPath: string, outPath: string,
                              options: HeatmapOptions = {}): void {
  const snap = readSnapshot(csvPath);
  const cell = Math.max(2, Math.floor(480 / Math.max(snap.nx, snap.ny)));
  const plotW = cell * snap.nx;
  const plotH = cell * snap.ny;
  const img = new Raster(MARGIN.left + plotW + MARGIN.right,
                         MARGIN.top + plotH + MARGIN.bottom);

  const flat = snap.density.flat();
  const scale = normalize(flat, options.logScale ?? false);
  for (let ix = 0; ix < snap.nx; ix++) {
    for (let iy = 0; iy < snap.ny; iy++) {
      const color = viridis(scale(snap.density[ix][iy]));
      img.fillRect(MARGIN.left + ix * cell,
                   MARGIN.top + (snap.ny - 1 - iy) * cell, cell, cell, color);
    }
  }

  // frame and axis labels
  const x0 = MARGIN.left;
  const y0 = MARGIN.top;
  img.line(x0, y0, x0 + plotW, y0, BLACK);
  img.line(x0, y0 + plotH, x0 + plotW, y0 + plotH, BLACK);
  img.line(x0, y0, x0, y0 + plotH, BLACK);
  img.line(x0 + plotW, y0, x0 + plotW, y0 + plotH, BLACK);
  const [x1axis, x2axis] = snap.axes;
  img.text(x0, y0 + plotH + 8, fmtNumber(x1axis[0]));
  const xmaxLabel = fmtNumber(x1axis[x1axis.length - 1]);
  img.text(x0 + plotW - textWidth(xmaxLabel), y0 + plotH + 8, xmaxLabel);
  img.text(x0 + Math.floor(plotW / 2) - textWidth("x1"), y0 + plotH + 22, "x1", BLACK, 2);
  img.text(4, y0 + plotH - 7, fmtNumber(x2axis[0]));
  img.text(4, y0, fmtNumber(x2axis[x2axis.length - 1]));
  img.text(4, y0 + Math.floor(plotH / 2) - 7, "x2", BLACK, 2);

  // colorbar with min/max labels
  const barX = x0 + plotW + 18;
  const barW = 14;
  for (let py = 0; py < plotH; py++) {
    const t = 1 - py / (plotH - 1);
    const color = viridis(t);
    img.fillRect(barX, y0 + py, barW, 1, color);
  }
  img.line(barX, y0, barX + barW, y0, BLACK);
  img.line(barX, y0 + plotH, barX + barW, y0 + plotH, BLACK);
  img.line(barX, y0, barX, y0 + plotH, BLACK);
  img.line(barX + barW, y0, barX + barW, y0 + plotH, BLACK);
  const lo = Math.min(...flat);
  const hi = Math.max(...flat);
  img.text(barX + barW + 4, y0, fmtNumber(hi));
  img.text(barX + barW + 4, y0 + plotH - 7, fmtNumber(lo));
  img.text(barX, y0 - 14, "abs2");

  img.savePng(outPath);
}
