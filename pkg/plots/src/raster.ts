/** RGBA raster with rectangles, lines, and bitmap text; saved as PNG. */

import * as fs from "node:fs";
import * as path from "node:path";
import { PNG } from "pngjs";
import { GLYPH_H, GLYPH_W, glyphFor } from "./font";

export type RGB = [number, number, number];

export const BLACK: RGB = [0, 0, 0];
export const WHITE: RGB = [255, 255, 255];
export const GREY: RGB = [170, 170, 170];
export const BLUE: RGB = [31, 119, 180];

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: RGB = WHITE) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    this.fillRect(0, 0, width, height, background);
  }

  set(x: number, y: number, [r, g, b]: RGB): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    this.data[i] = r;
    this.data[i + 1] = g;
    this.data[i + 2] = b;
    this.data[i + 3] = 255;
  }

  fillRect(x: number, y: number, w: number, h: number, color: RGB): void {
    for (let yy = y; yy < y + h; yy++) {
      for (let xx = x; xx < x + w; xx++) this.set(xx, yy, color);
    }
  }

  /** Bresenham segment. */
  line(x0: number, y0: number, x1: number, y1: number, color: RGB): void {
    let [ax, ay] = [Math.round(x0), Math.round(y0)];
    const [bx, by] = [Math.round(x1), Math.round(y1)];
    const dx = Math.abs(bx - ax);
    const dy = -Math.abs(by - ay);
    const sx = ax < bx ? 1 : -1;
    const sy = ay < by ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(ax, ay, color);
      if (ax === bx && ay === by) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        ax += sx;
      }
      if (e2 <= dx) {
        err += dx;
        ay += sy;
      }
    }
  }

  marker(x: number, y: number, size: number, color: RGB): void {
    this.fillRect(Math.round(x - size / 2), Math.round(y - size / 2), size, size, color);
  }

  text(x: number, y: number, message: string, color: RGB = BLACK, scale = 1): void {
    let cx = Math.round(x);
    for (const ch of message) {
      const rows = glyphFor(ch);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if (rows[gy][gx] === "X") {
            this.fillRect(cx + gx * scale, Math.round(y) + gy * scale, scale, scale, color);
          }
        }
      }
      cx += (GLYPH_W + 1) * scale;
    }
  }

  savePng(file: string): void {
    const png = new PNG({ width: this.width, height: this.height });
    Buffer.from(this.data).copy(png.data);
    fs.mkdirSync(path.dirname(path.resolve(file)), { recursive: true });
    fs.writeFileSync(file, PNG.sync.write(png));
  }
}

/** Compact numeric label, e.g. 0.0125, -24.5, 9.3e-9. */
export function fmtNumber(x: number): string {
  if (x === 0) return "0";
  const ax = Math.abs(x);
  if (ax >= 0.001 && ax < 10000) {
    const out = x.toPrecision(3);
    return out.includes(".") ? out.replace(/\.?0+$/, "") : out;
  }
  return x.toExponential(1).replace("e+", "e");
}
