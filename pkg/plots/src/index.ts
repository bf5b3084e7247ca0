export { FormatError, readSnapshot, readSweep } from "./csv";
export type { SnapshotTable, SweepTable } from "./csv";
export { fitLogLogSlope } from "./fit";
export { renderHeatmap } from "./heatmap";
export { renderConvergence } from "./convergence";
export type { ConvergenceResult } from "./convergence";
