import {
  FigureBody,
  Frame,
  PALETTE,
  axisLeft,
  bandAxisBottom,
  gridLines,
  legend,
  panelTitle,
  whisker,
} from "../chart.js";
import { Manifest } from "../manifest.js";
import { formatNumber, linearScale, linearTicks } from "../scale.js";
import { rect } from "../svg.js";
import { GammaSummary, readSummaries } from "../sweepData.js";

interface BarSeries {
  label: string;
  color: string;
  pick: (s: GammaSummary) => { mean: number; std: number };
}

const SERIES: BarSeries[] = [
  { label: "mean JET", color: PALETTE[0], pick: (s) => s.meanJet },
  { label: "mean JCT", color: PALETTE[1], pick: (s) => s.meanJct },
  { label: "mean wait", color: PALETTE[2], pick: (s) => s.meanWait },
];

/** Grouped bars of the per-rate latency aggregates: one group per
 * arrival rate, one bar per metric, std whiskers on top. */
export function metricBars(manifest: Manifest): FigureBody {
  const summaries = readSummaries(manifest);

  const width = 560;
  const height = 392;
  const frame: Frame = { x0: 70, y0: 44, x1: 420, y1: 330 };
  const parts: string[] = [];

  const vMax = Math.max(
    ...summaries.flatMap((s) => SERIES.map((def) => def.pick(s).mean + def.pick(s).std)),
  );
  const ym = linearScale([0, vMax * 1.12], [frame.y1, frame.y0]);
  const yTicks = linearTicks(0, vMax * 1.12);
  const slot = (frame.x1 - frame.x0) / summaries.length;
  const barW = Math.min((slot * 0.72) / SERIES.length, 36);
  const centers = summaries.map((_, i) => frame.x0 + (i + 0.5) * slot);

  parts.push(gridLines(frame, ym, yTicks));
  parts.push(axisLeft(frame, ym, yTicks, "seconds"));
  parts.push(
    bandAxisBottom(
      frame,
      centers,
      summaries.map((s) => formatNumber(s.gamma)),
      "arrival rate (jobs/s)",
    ),
  );
  parts.push(panelTitle(frame, "job times by arrival rate"));

  summaries.forEach((s, i) => {
    SERIES.forEach((def, si) => {
      const v = def.pick(s);
      const x = centers[i] + (si - (SERIES.length - 1) / 2) * barW;
      const yTop = ym(v.mean);
      parts.push(
        rect(x - barW / 2 + 1, yTop, barW - 2, frame.y1 - yTop, { fill: def.color }),
      );
      if (v.std > 0) {
        parts.push(whisker(x, ym(Math.max(0, v.mean - v.std)), ym(v.mean + v.std), "#333333"));
      }
    });
  });

  parts.push(legend(frame.x1 + 10, frame.y0 + 12, SERIES));

  return { width, height, parts };
}
