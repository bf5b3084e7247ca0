import { createHash } from "node:crypto";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, describe, expect, it } from "vitest";
import { PNG } from "pngjs";
import { FormatError } from "../src/csv";
import { renderConvergence } from "../src/convergence";
import { renderHeatmap } from "../src/heatmap";
import { main } from "../src/cli";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "plots-render-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

function write(name: string, text: string): string {
  const file = path.join(tmp, name);
  fs.writeFileSync(file, text);
  return file;
}

function gaussianSnapshot(n: number): string {
  const lines = ["x1,x2,re,im,abs2"];
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const a = -2 + (4 * i) / (n - 1);
      const b = -2 + (4 * j) / (n - 1);
      const v = Math.exp(-(a * a + b * b));
      lines.push(`${a},${b},${Math.sqrt(v)},0,${v}`);
    }
  }
  return lines.join("\n") + "\n";
}

function sha(file: string): string {
  return createHash("sha256").update(fs.readFileSync(file)).digest("hex");
}

describe("renderHeatmap", () => {
  it("produces a decodable PNG and leaves the input unchanged", () => {
    const csv = write("snap.csv", gaussianSnapshot(21));
    const before = sha(csv);
    const out = path.join(tmp, "heat.png");
    renderHeatmap(csv, out);
    expect(sha(csv)).toBe(before);
    const png = PNG.sync.read(fs.readFileSync(out));
    expect(png.width).toBeGreaterThan(100);
    expect(png.height).toBeGreaterThan(100);
  });

  it("renders an all-zero snapshot without crashing", () => {
    const lines = ["x1,x2,re,im,abs2"];
    for (const a of [0, 1]) for (const b of [0, 1]) lines.push(`${a},${b},0,0,0`);
    const csv = write("zeros.csv", lines.join("\n") + "\n");
    const out = path.join(tmp, "zeros.png");
    renderHeatmap(csv, out);
    expect(fs.statSync(out).size).toBeGreaterThan(0);
  });

  it("supports the log colour scale", () => {
    const csv = write("snap2.csv", gaussianSnapshot(15));
    const a = path.join(tmp, "lin.png");
    const b = path.join(tmp, "log.png");
    renderHeatmap(csv, a, { logScale: false });
    renderHeatmap(csv, b, { logScale: true });
    expect(sha(a)).not.toBe(sha(b));
  });
});

describe("renderConvergence", () => {
  it("annotates an exact power law with slope 2.00 +- 0.01", () => {
    const values = [0.4, 0.2, 0.1, 0.05];
    const rows = values.map((v, i) => `h,${v},${v * v},${i === 0 ? "" : "2.0"}`);
    const csv = write("quad.csv", "param,value,error,rate\n" + rows.join("\n") + "\n");
    const out = path.join(tmp, "quad.png");
    const { slope } = renderConvergence(csv, out);
    expect(slope).not.toBeNull();
    expect(Math.abs((slope as number) - 2.0)).toBeLessThan(0.01);
    expect(fs.statSync(out).size).toBeGreaterThan(0);
  });

  it("draws a single-row sweep as a scatter without a fit", () => {
    const csv = write("single.csv", "param,value,error,rate\ntau,0.1,0.01,\n");
    const out = path.join(tmp, "single.png");
    const { slope } = renderConvergence(csv, out);
    expect(slope).toBeNull();
    expect(fs.statSync(out).size).toBeGreaterThan(0);
  });

  it("rejects non-positive errors", () => {
    const csv = write("neg.csv", "param,value,error,rate\ntau,0.1,0.0,\n");
    expect(() => renderConvergence(csv, path.join(tmp, "neg.png"))).toThrow(FormatError);
  });
});

describe("cli", () => {
  it("runs both subcommands and fails cleanly on bad input", () => {
    const snap = write("cli_snap.csv", gaussianSnapshot(11));
    expect(main(["heatmap", snap, path.join(tmp, "cli_heat.png")])).toBe(0);
    const sweep = write("cli_sweep.csv",
      "param,value,error,rate\nR,6,0.1,\nR,8,0.01,-8\n");
    expect(main(["convergence", sweep, path.join(tmp, "cli_conv.png")])).toBe(0);
    expect(main(["convergence", path.join(tmp, "missing.csv"),
                 path.join(tmp, "x.png")])).toBe(1);
    expect(main(["heatmap", sweep, path.join(tmp, "bad.png")])).toBe(1);
  });
});
