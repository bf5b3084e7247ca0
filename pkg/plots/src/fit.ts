/** Least-squares slope of log(error) against log(param). */

export function fitLogLogSlope(values: number[], errors: number[]): number {
  if (values.length !== errors.length || values.length < 2) {
    throw new Error("need at least two (value, error) pairs");
  }
  const xs = values.map(Math.log);
  const ys = errors.map(Math.log);
  const n = xs.length;
  const mx = xs.reduce((a, b) => a + b, 0) / n;
  const my = ys.reduce((a, b) => a + b, 0) / n;
  let sxy = 0;
  let sxx = 0;
  for (let i = 0; i < n; i++) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx === 0) throw new Error("degenerate sweep: all values equal");
  return sxy / sxx;
}
