import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";

import { DataError } from "./errors.js";
import { parseCsv, Table } from "./csv.js";

export interface ManifestFile {
  path: string;
  kind: string;
}

export interface Manifest {
  command: string;
  seed: number;
  configHash: string;
  files: ManifestFile[];
  /** Directory the manifest lives in; listed paths resolve against it. */
  dir: string;
}

export function readManifest(path: string): Manifest {
  let raw: string;
  try {
    raw = readFileSync(path, "utf8");
  } catch {
    throw new DataError(`cannot read manifest: ${path}`);
  }
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch (err) {
    throw new DataError(`manifest ${path} is not valid json: ${(err as Error).message}`);
  }
  const obj = doc as Record<string, unknown>;
  if (typeof obj.command !== "string") {
    throw new DataError(`manifest ${path}: missing string field "command"`);
  }
  if (typeof obj.seed !== "number") {
    throw new DataError(`manifest ${path}: missing numeric field "seed"`);
  }
  if (typeof obj.config_hash !== "string") {
    throw new DataError(`manifest ${path}: missing string field "config_hash"`);
  }
  if (!Array.isArray(obj.files)) {
    throw new DataError(`manifest ${path}: missing array field "files"`);
  }
  const files = obj.files.map((f, i) => {
    const entry = f as Record<string, unknown>;
    if (typeof entry.path !== "string" || typeof entry.kind !== "string") {
      throw new DataError(`manifest ${path}: files[${i}] needs string "path" and "kind"`);
    }
    return { path: entry.path, kind: entry.kind };
  });
  return {
    command: obj.command,
    seed: obj.seed,
    configHash: obj.config_hash,
    files,
    dir: dirname(path),
  };
}

/** Listed file names matching a pattern, in manifest (path-sorted) order. */
export function matchFiles(manifest: Manifest, pattern: RegExp): string[] {
  return manifest.files.map((f) => f.path).filter((p) => pattern.test(p));
}

export function resolveFile(manifest: Manifest, name: string): string {
  const entry = manifest.files.find((f) => f.path === name);
  if (!entry) {
    throw new DataError(`manifest for "${manifest.command}" run does not list ${name}`);
  }
  return join(manifest.dir, name);
}

function readListed(manifest: Manifest, name: string): string {
  const path = resolveFile(manifest, name);
  try {
    return readFileSync(path, "utf8");
  } catch {
    throw new DataError(`listed file is missing on disk: ${path}`);
  }
}

export function readTable(manifest: Manifest, name: string): Table {
  return parseCsv(readListed(manifest, name), join(manifest.dir, name));
}

export function readJsonFile(manifest: Manifest, name: string): Record<string, unknown> {
  const raw = readListed(manifest, name);
  try {
    return JSON.parse(raw) as Record<string, unknown>;
  } catch (err) {
    throw new DataError(`${name} is not valid json: ${(err as Error).message}`);
  }
}

/** Numeric field lookup with dotted access, e.g. "mean_jet.std". */
export function jsonNumber(doc: Record<string, unknown>, dotted: string, file: string): number {
  let node: unknown = doc;
  for (const part of dotted.split(".")) {
    if (typeof node !== "object" || node === null || !(part in node)) {
      throw new DataError(`${file}: missing field "${dotted}"`);
    }
    node = (node as Record<string, unknown>)[part];
  }
  if (typeof node !== "number" || !Number.isFinite(node)) {
    throw new DataError(`${file}: field "${dotted}" is not a finite number`);
  }
  return node;
}
