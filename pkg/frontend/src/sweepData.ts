import { DataError } from "./errors.js";
import { numericColumn } from "./csv.js";
import { Manifest, jsonNumber, matchFiles, readJsonFile, readTable } from "./manifest.js";

export interface Stat {
  mean: number;
  std: number;
}

export interface GammaSummary {
  gamma: number;
  nReps: number;
  pReject: Stat;
  meanJet: Stat;
  meanJct: Stat;
  meanWait: Stat;
  usage: Stat;
}

function stat(doc: Record<string, unknown>, key: string, file: string): Stat {
  return {
    mean: jsonNumber(doc, `${key}.mean`, file),
    std: jsonNumber(doc, `${key}.std`, file),
  };
}

/** Per-rate aggregates from summary_g*.json, ordered by sweep position. */
export function readSummaries(manifest: Manifest): GammaSummary[] {
  const names = matchFiles(manifest, /^summary_g\d+\.json$/);
  if (names.length === 0) {
    throw new DataError(`manifest for "${manifest.command}" run lists no summary_g*.json files`);
  }
  names.sort((a, b) => summaryIndex(a) - summaryIndex(b));
  return names.map((name) => {
    const doc = readJsonFile(manifest, name);
    return {
      gamma: jsonNumber(doc, "gamma", name),
      nReps: jsonNumber(doc, "n_reps", name),
      pReject: stat(doc, "p_reject", name),
      meanJet: stat(doc, "mean_jet", name),
      meanJct: stat(doc, "mean_jct", name),
      meanWait: stat(doc, "mean_wait", name),
      usage: stat(doc, "usage", name),
    };
  });
}

function summaryIndex(name: string): number {
  return Number(name.replace(/^summary_g(\d+)\.json$/, "$1"));
}

/** Busy-QPU share per occupancy level for one sweep position, averaged
 * over racks. Level 0 is idle time and is excluded by construction. */
export function readOccupancyShares(manifest: Manifest, index: number): number[] {
  const table = readTable(manifest, `occupancy_g${index}_rep0.csv`);
  const levels = table.columns.filter((c) => /^p_occ\d+$/.test(c));
  if (levels.length === 0) {
    throw new DataError(`missing column "p_occ0" in ${table.path}`);
  }
  const shares: number[] = [];
  for (let k = 1; k < levels.length; k++) {
    const col = numericColumn(table, `p_occ${k}`);
    shares.push(col.reduce((a, b) => a + b, 0) / col.length);
  }
  return shares;
}

export interface RepPoints {
  gamma: number[];
  jet: number[];
}

/** Raw per-repetition latency points from sweep.csv. */
export function readRepPoints(manifest: Manifest): RepPoints {
  const table = readTable(manifest, "sweep.csv");
  return {
    gamma: numericColumn(table, "gamma"),
    jet: numericColumn(table, "mean_jet_s"),
  };
}
