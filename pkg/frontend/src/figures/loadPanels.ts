import {
  FigureBody,
  Frame,
  PALETTE,
  axisBottom,
  axisLeft,
  axisRight,
  bandAxisBottom,
  gridLines,
  legend,
  marker,
  panelTitle,
  whisker,
} from "../chart.js";
import { Manifest } from "../manifest.js";
import { formatNumber, linearScale, linearTicks, logScale, logTicks } from "../scale.js";
import { circle, polyline, rect, text } from "../svg.js";
import { readOccupancyShares, readRepPoints, readSummaries } from "../sweepData.js";

const REJECT_COLOR = PALETTE[2];

/** Dual panel for one load sweep: latency and rejection against arrival
 * rate on the left, QPU usage bars stacked by rack occupancy level on
 * the right. */
export function loadPanels(manifest: Manifest): FigureBody {
  const summaries = readSummaries(manifest);
  const reps = readRepPoints(manifest);
  const shares = summaries.map((_, i) => readOccupancyShares(manifest, i));

  const width = 880;
  const height = 392;
  const left: Frame = { x0: 66, y0: 44, x1: 406, y1: 330 };
  const right: Frame = { x0: 540, y0: 44, x1: 816, y1: 330 };
  const parts: string[] = [];

  // Left panel: mean JET and JCT with std whiskers, rejection on the
  // right-hand axis, faint per-repetition points behind the means.
  const gammas = summaries.map((s) => s.gamma);
  const gLo = Math.min(...gammas) / 1.4;
  const gHi = Math.max(...gammas) * 1.4;
  const xm = logScale([gLo, gHi], [left.x0, left.x1]);
  const tMax = Math.max(
    ...summaries.map((s) => Math.max(s.meanJet.mean + s.meanJet.std, s.meanJct.mean + s.meanJct.std)),
    ...reps.jet,
  );
  const ym = linearScale([0, tMax * 1.12], [left.y1, left.y0]);
  const yTicks = linearTicks(0, tMax * 1.12);

  parts.push(gridLines(left, ym, yTicks));
  parts.push(axisBottom(left, xm, logTicks(gLo, gHi), "arrival rate (jobs/s)"));
  parts.push(axisLeft(left, ym, yTicks, "job time (s)"));
  parts.push(panelTitle(left, "latency and rejection vs load"));

  reps.gamma.forEach((g, i) => {
    parts.push(circle(xm(g), ym(reps.jet[i]), 2, { fill: "#999999", "fill-opacity": 0.55 }));
  });

  const seriesDefs: Array<{ key: "meanJet" | "meanJct"; label: string; color: string }> = [
    { key: "meanJet", label: "mean JET", color: PALETTE[0] },
    { key: "meanJct", label: "mean JCT", color: PALETTE[1] },
  ];
  seriesDefs.forEach((def, si) => {
    const pts = summaries.map((s) => [xm(s.gamma), ym(s[def.key].mean)] as [number, number]);
    parts.push(polyline(pts, { stroke: def.color }));
    summaries.forEach((s, i) => {
      const v = s[def.key];
      if (v.std > 0) {
        parts.push(whisker(xm(s.gamma), ym(Math.max(0, v.mean - v.std)), ym(v.mean + v.std), def.color));
      }
      parts.push(marker(pts[i][0], pts[i][1], def.color, si));
    });
  });

  const rm = linearScale([0, 1], [left.y1, left.y0]);
  parts.push(axisRight(left, rm, [0, 0.25, 0.5, 0.75, 1], "rejected fraction", REJECT_COLOR));
  const rejPts = summaries.map((s) => [xm(s.gamma), rm(s.pReject.mean)] as [number, number]);
  parts.push(polyline(rejPts, { stroke: REJECT_COLOR, "stroke-dasharray": "5 3" }));
  summaries.forEach((s, i) => {
    if (s.pReject.std > 0) {
      parts.push(
        whisker(
          rejPts[i][0],
          rm(Math.max(0, s.pReject.mean - s.pReject.std)),
          rm(Math.min(1, s.pReject.mean + s.pReject.std)),
          REJECT_COLOR,
        ),
      );
    }
    parts.push(marker(rejPts[i][0], rejPts[i][1], REJECT_COLOR, 2));
  });

  parts.push(
    legend(left.x0 + 8, left.y0 + 12, [
      { label: "mean JET", color: PALETTE[0] },
      { label: "mean JCT", color: PALETTE[1] },
      { label: "rejected fraction", color: REJECT_COLOR, dashed: true },
    ]),
  );

  // Right panel: one usage bar per rate, split by how many QPUs of a
  // rack are busy at once (time share over the run's busy window).
  const nLevels = Math.max(...shares.map((s) => s.length));
  const uMax = Math.max(...summaries.map((s) => s.usage.mean + s.usage.std), 1e-9);
  const um = linearScale([0, uMax * 1.25], [right.y1, right.y0]);
  const uTicks = linearTicks(0, uMax * 1.25);
  const slot = (right.x1 - right.x0) / summaries.length;
  const barW = Math.min(slot * 0.55, 64);
  const centers = summaries.map((_, i) => right.x0 + (i + 0.5) * slot);

  parts.push(gridLines(right, um, uTicks));
  parts.push(axisLeft(right, um, uTicks, "QPU usage"));
  parts.push(
    bandAxisBottom(right, centers, gammas.map(formatNumber), "arrival rate (jobs/s)"),
  );
  parts.push(panelTitle(right, "usage by rack occupancy"));

  summaries.forEach((s, i) => {
    const segs = shares[i];
    const total = segs.reduce((a, b) => a + b, 0);
    let cum = 0;
    segs.forEach((share, k) => {
      const h = total > 0 ? s.usage.mean * (share / total) : 0;
      if (h <= 0) {
        return;
      }
      const yTop = um(cum + h);
      parts.push(
        rect(centers[i] - barW / 2, yTop, barW, um(cum) - yTop, {
          fill: PALETTE[k % PALETTE.length],
          stroke: "#ffffff",
          "stroke-width": 0.5,
        }),
      );
      cum += h;
    });
    if (s.usage.std > 0) {
      parts.push(
        whisker(centers[i], um(Math.max(0, s.usage.mean - s.usage.std)), um(s.usage.mean + s.usage.std), "#333333"),
      );
    }
    parts.push(
      text(centers[i], um(s.usage.mean + s.usage.std) - 6, `${(s.usage.mean * 100).toFixed(1)}%`, {
        "text-anchor": "middle",
      }),
    );
  });

  const levelEntries = [];
  for (let k = 0; k < nLevels; k++) {
    levelEntries.push({
      label: `${k + 1} QPU${k === 0 ? "" : "s"} busy`,
      color: PALETTE[k % PALETTE.length],
    });
  }
  parts.push(legend(right.x0 + 8, right.y0 + 12, levelEntries));

  return { width, height, parts };
}
