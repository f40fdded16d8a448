import { cpSync, existsSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { DataError } from "../src/errors.js";
import { FIGURE_KINDS, FigureKind, render, renderToString } from "../src/render.js";
import { FIXTURES, tmpDir, writeSyntheticTailRun } from "./helpers.js";

const SWEEP = join(FIXTURES, "sweep", "manifest.json");
const PROTOCOL = join(FIXTURES, "protocol", "manifest.json");

function manifestFor(kind: FigureKind): string {
  return kind === "tail" || kind === "rate-curves" ? PROTOCOL : SWEEP;
}

describe("rendering from simulator outputs", () => {
  for (const kind of FIGURE_KINDS) {
    it(`renders ${kind}`, () => {
      const out = join(tmpDir(kind), "fig.svg");
      render({ kind, manifestPath: manifestFor(kind), outPath: out });
      const svg = readFileSync(out, "utf8");
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    });
  }

  it("stacks the usage bars by rack occupancy level", () => {
    const svg = renderToString({ kind: "load-panels", manifestPath: SWEEP, outPath: "" });
    expect(svg).toContain("QPU usage");
    expect(svg).toContain("1 QPU busy");
    expect(svg).toContain("2 QPUs busy");
  });

  it("puts the tail on a log y axis with the fitted line", () => {
    const svg = renderToString({ kind: "tail", manifestPath: PROTOCOL, outPath: "" });
    expect(svg).toContain("P(T &gt; t)");
    expect(svg).toContain("stroke-dasharray");
    expect(svg).toContain(">0.01<");
    expect(svg).toContain(">0.1<");
  });

  it("is a pure function of the input files", () => {
    const a = renderToString({ kind: "metric-bars", manifestPath: SWEEP, outPath: "" });
    const b = renderToString({ kind: "metric-bars", manifestPath: SWEEP, outPath: "" });
    expect(a).toBe(b);
    expect(a).not.toContain("rendered 2");
  });

  it("adds a timestamp footer only when asked", () => {
    const svg = renderToString({
      kind: "metric-bars",
      manifestPath: SWEEP,
      outPath: "",
      timestampFooter: true,
    });
    expect(svg).toMatch(/rendered \d{4}-\d{2}-\d{2}T/);
  });
});

describe("synthetic exponential tail", () => {
  it("renders a straight-line tail from generated samples", () => {
    const dir = tmpDir("expo");
    const manifest = writeSyntheticTailRun(dir, 50, 2000);
    const out = join(dir, "tail.svg");
    render({ kind: "tail", manifestPath: manifest, outPath: out });
    const svg = readFileSync(out, "utf8");
    expect(svg).toContain("rate 50.0/s");
    expect(svg).toContain("time to entanglement (ms)");
  });
});

describe("input rejection", () => {
  it("refuses an empty csv and writes nothing", () => {
    const dir = tmpDir("empty");
    const manifest = writeSyntheticTailRun(dir, 50, 10);
    writeFileSync(join(dir, "success_times.csv"), "iteration,success_time_s,status\n");
    const out = join(dir, "fig.svg");
    expect(() => render({ kind: "tail", manifestPath: manifest, outPath: out })).toThrowError(
      /empty csv/,
    );
    expect(existsSync(out)).toBe(false);
  });

  it("names a renamed column", () => {
    const dir = tmpDir("badcol");
    cpSync(join(FIXTURES, "sweep"), dir, { recursive: true });
    const sweepCsv = join(dir, "sweep.csv");
    writeFileSync(
      sweepCsv,
      readFileSync(sweepCsv, "utf8").replace("mean_jet_s", "jet_seconds"),
    );
    try {
      renderToString({ kind: "load-panels", manifestPath: join(dir, "manifest.json"), outPath: "" });
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(DataError);
      expect((err as Error).message).toContain('missing column "mean_jet_s"');
    }
  });

  it("names a file the manifest does not list", () => {
    const dir = tmpDir("nolist");
    const manifest = writeSyntheticTailRun(dir, 50, 10);
    expect(() =>
      renderToString({ kind: "load-panels", manifestPath: manifest, outPath: "" }),
    ).toThrowError(/does not list|lists no summary/);
  });

  it("names a manifest field that is missing", () => {
    const dir = tmpDir("badmanifest");
    const path = join(dir, "manifest.json");
    writeFileSync(path, JSON.stringify({ seed: 1, files: [] }));
    expect(() => renderToString({ kind: "tail", manifestPath: path, outPath: "" })).toThrowError(
      /missing string field "command"/,
    );
  });
});
