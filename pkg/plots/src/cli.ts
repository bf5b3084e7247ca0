#!/usr/bin/env node
/**
 * plots heatmap <snapshot.csv> <out.png> [--log]
 * plots convergence <sweep.csv> <out.png>
 *
 * Renders the solver's CSV outputs; `convergence` also prints its fitted
 * slope as `slope=<value>` for scripting.
 */

import { FormatError } from "./csv";
import { renderConvergence } from "./convergence";
import { renderHeatmap } from "./heatmap";

function usage(): never {
  console.error("usage: plots heatmap <snapshot.csv> <out.png> [--log]");
  console.error("       plots convergence <sweep.csv> <out.png>");
  process.exit(2);
}

export function main(argv: string[]): number {
  const [command, input, output, ...rest] = argv;
  if (!command || !input || !output) usage();
  try {
    if (command === "heatmap") {
      const logScale = rest.includes("--log");
      renderHeatmap(input, output, { logScale });
    } else if (command === "convergence") {
      const { slope } = renderConvergence(input, output);
      if (slope !== null) console.log(`slope=${slope}`);
    } else {
      usage();
    }
  } catch (err) {
    if (err instanceof FormatError || (err as NodeJS.ErrnoException)?.code === "ENOENT") {
      console.error(`error: ${(err as Error).message}`);
      return 1;
    }
    throw err;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
