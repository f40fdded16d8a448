import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

export const FIXTURES = fileURLToPath(new URL("./fixtures/", import.meta.url));

export function tmpDir(label: string): string {
  return mkdtempSync(join(tmpdir(), `plotkit-${label}-`));
}

/** Small deterministic RNG so synthetic fixtures are reproducible. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function exponentialSamples(rate: number, n: number, seed: number): number[] {
  const rng = mulberry32(seed);
  const out: number[] = [];
  for (let i = 0; i < n; i++) {
    out.push(-Math.log(1 - rng()) / rate);
  }
  return out;
}

/** Write a minimal protocol-run directory (manifest + success times +
 * fit) holding exponential samples at the given rate. */
export function writeSyntheticTailRun(dir: string, rate: number, n: number, seed = 42): string {
  const samples = exponentialSamples(rate, n, seed);
  const lines = ["iteration,success_time_s,status"];
  samples.forEach((t, i) => lines.push(`${i},${t},success`));
  writeFileSync(join(dir, "success_times.csv"), lines.join("\n") + "\n");
  writeFileSync(
    join(dir, "lambda_fit.json"),
    JSON.stringify({ lambda_ss: rate, n_exhausted: 0, n_success: n, r2: 1.0 }) + "\n",
  );
  const manifest = {
    command: "protocol-mc",
    seed,
    config_hash: "0".repeat(64),
    files: [
      { path: "lambda_fit.json", kind: "json" },
      { path: "success_times.csv", kind: "csv" },
    ],
  };
  const path = join(dir, "manifest.json");
  writeFileSync(path, JSON.stringify(manifest, null, 2) + "\n");
  return path;
}
