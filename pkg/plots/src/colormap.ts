/** Viridis-style colormap from anchor stops with linear interpolation. */

import { RGB } from "./raster";

const STOPS: RGB[] = [
  [68, 1, 84],
  [72, 40, 120],
  [62, 74, 137],
  [49, 104, 142],
  [38, 130, 142],
  [31, 158, 137],
  [53, 183, 121],
  [109, 205, 89],
  [180, 222, 44],
  [253, 231, 37],
];

/** t in [0, 1] -> RGB. */
export function viridis(t: number): RGB {
  const s = Math.min(1, Math.max(0, t)) * (STOPS.length - 1);
  const i = Math.min(STOPS.length - 2, Math.floor(s));
  const f = s - i;
  const a = STOPS[i];
  const b = STOPS[i + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

/** Map density values to [0, 1], linearly or logarithmically. */
export function normalize(values: number[], logScale: boolean): (v: number) => number {
  if (logScale) {
    const positive = values.filter((v) => v > 0);
    const max = positive.length ? Math.max(...positive) : 1;
    const min = positive.length ? Math.min(...positive) : 0.1;
    const floor = Math.max(min, max * 1e-12);
    const span = Math.log(max / floor) || 1;
    return (v) => (v <= floor ? 0 : Math.log(v / floor) / span);
  }
  const max = Math.max(...values);
  const min = Math.min(...values);
  const span = max - min || 1;
  return (v) => (v - min) / span;
}
