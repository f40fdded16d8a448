import { writeFileSync } from "node:fs";

import { FigureBody } from "./chart.js";
import { DataError } from "./errors.js";
import { Manifest, readManifest } from "./manifest.js";
import { svgDocument, text } from "./svg.js";
import { loadPanels } from "./figures/loadPanels.js";
import { metricBars } from "./figures/metricBars.js";
import { rateCurves } from "./figures/rateCurves.js";
import { tail } from "./figures/tail.js";

export type FigureKind = "load-panels" | "metric-bars" | "tail" | "rate-curves";

export const FIGURE_KINDS: FigureKind[] = ["load-panels", "metric-bars", "tail", "rate-curves"];

export interface FigureSpec {
  kind: FigureKind;
  manifestPath: string;
  outPath: string;
  title?: string;
  /** Off by default so the output is a pure function of the input files. */
  timestampFooter?: boolean;
}

const RENDERERS: Record<FigureKind, (manifest: Manifest) => FigureBody> = {
  "load-panels": loadPanels,
  "metric-bars": metricBars,
  tail: tail,
  "rate-curves": rateCurves,
};

export function renderToString(spec: FigureSpec): string {
  const renderer = RENDERERS[spec.kind];
  if (!renderer) {
    throw new DataError(
      `unknown figure kind "${spec.kind}"; expected one of: ${FIGURE_KINDS.join(", ")}`,
    );
  }
  const manifest = readManifest(spec.manifestPath);
  const body = renderer(manifest);
  const parts = [...body.parts];
  if (spec.title) {
    parts.push(
      text(body.width / 2, 18, spec.title, {
        "text-anchor": "middle",
        "font-size": 14,
        "font-weight": "bold",
      }),
    );
  }
  if (spec.timestampFooter) {
    parts.push(
      text(6, body.height - 6, `rendered ${new Date().toISOString()}`, {
        "font-size": 9,
        fill: "#888888",
      }),
    );
  }
  return svgDocument(body.width, body.height, parts);
}

/** Render and write; nothing is written when the input is rejected. */
export function render(spec: FigureSpec): void {
  const svg = renderToString(spec);
  writeFileSync(spec.outPath, svg);
}
