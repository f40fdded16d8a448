import { cpSync, existsSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { afterEach, describe, expect, it, vi } from "vitest";

import { main } from "../src/cli.js";
import { FIXTURES, tmpDir } from "./helpers.js";

const SWEEP = join(FIXTURES, "sweep", "manifest.json");

function captureStderr(): string[] {
  const lines: string[] = [];
  vi.spyOn(console, "error").mockImplementation((msg) => {
    lines.push(String(msg));
  });
  return lines;
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("cli", () => {
  it("renders a figure and exits 0", () => {
    const out = join(tmpDir("cli"), "fig.svg");
    const rc = main(["--manifest", SWEEP, "--figure", "load-panels", "--out", out]);
    expect(rc).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });

  it("exits 2 with usage when a flag is missing", () => {
    const lines = captureStderr();
    expect(main(["--manifest", SWEEP, "--figure", "tail"])).toBe(2);
    expect(lines.join("\n")).toContain("--out PATH");
  });

  it("exits 2 on an unknown figure kind, listing valid ones", () => {
    const lines = captureStderr();
    expect(main(["--manifest", SWEEP, "--figure", "pie", "--out", "/tmp/x.svg"])).toBe(2);
    expect(lines.join("\n")).toContain('unknown figure kind "pie"');
    expect(lines.join("\n")).toContain("load-panels");
  });

  it("exits 2 and names the column on a schema mismatch", () => {
    const dir = tmpDir("clibad");
    cpSync(join(FIXTURES, "sweep"), dir, { recursive: true });
    const sweepCsv = join(dir, "sweep.csv");
    writeFileSync(sweepCsv, readFileSync(sweepCsv, "utf8").replace("mean_jet_s", "jet"));
    const out = join(dir, "fig.svg");
    const lines = captureStderr();
    const rc = main([
      "--manifest",
      join(dir, "manifest.json"),
      "--figure",
      "load-panels",
      "--out",
      out,
    ]);
    expect(rc).toBe(2);
    expect(lines.join("\n")).toContain('missing column "mean_jet_s"');
    expect(existsSync(out)).toBe(false);
  });

  it("exits 2 when the manifest path is unreadable", () => {
    const lines = captureStderr();
    const rc = main(["--manifest", "/nope/m.json", "--figure", "tail", "--out", "/tmp/x.svg"]);
    expect(rc).toBe(2);
    expect(lines.join("\n")).toContain("cannot read manifest");
  });
});
