import {
  FigureBody,
  Frame,
  PALETTE,
  axisBottom,
  axisLeft,
  gridLines,
  legend,
  panelTitle,
} from "../chart.js";
import { DataError } from "../errors.js";
import { numericColumn, stringColumn } from "../csv.js";
import { Manifest, jsonNumber, readJsonFile, readTable } from "../manifest.js";
import { linearScale, linearTicks, logScale, logTicks } from "../scale.js";
import { circle, polyline } from "../svg.js";
import { survivalPoints } from "../stats.js";

/** Cap the number of drawn survival points; a deterministic stride keeps
 * big runs readable without changing the curve's shape. */
const MAX_POINTS = 512;

/** Tail of the time-to-entanglement distribution on a log y axis, with
 * the fitted exponential overlaid as a straight dashed line. */
export function tail(manifest: Manifest): FigureBody {
  const table = readTable(manifest, "success_times.csv");
  const status = stringColumn(table, "status");
  const times = numericColumn(table, "success_time_s");
  const ok = times.filter((_, i) => status[i] === "success");
  if (ok.length === 0) {
    throw new DataError(`no successful attempts in ${table.path}`);
  }
  const fit = readJsonFile(manifest, "lambda_fit.json");
  const lambda = jsonNumber(fit, "lambda_ss", "lambda_fit.json");

  const pts = survivalPoints(ok.map((t) => t * 1e3));
  const stride = Math.max(1, Math.ceil(pts.length / MAX_POINTS));
  const drawn = pts.filter((_, i) => i % stride === 0 || i === pts.length - 1);

  const width = 560;
  const height = 392;
  const frame: Frame = { x0: 70, y0: 44, x1: 520, y1: 330 };
  const parts: string[] = [];

  const tMax = pts[pts.length - 1].t * 1.04;
  const pMin = pts[pts.length - 1].p;
  const xm = linearScale([0, tMax], [frame.x0, frame.x1]);
  const ym = logScale([pMin, 1], [frame.y1, frame.y0]);
  const yTicks = logTicks(pMin, 1);

  parts.push(gridLines(frame, ym, yTicks));
  parts.push(axisBottom(frame, xm, linearTicks(0, tMax), "time to entanglement (ms)"));
  parts.push(axisLeft(frame, ym, yTicks, "P(T > t)"));
  parts.push(panelTitle(frame, "time-to-entanglement tail"));

  // Straight line on this axis: S(t) = exp(-lambda t), t in ms.
  const lambdaMs = lambda / 1e3;
  const tEnd = Math.min(tMax, Math.log(1 / pMin) / lambdaMs);
  parts.push(
    polyline(
      [
        [xm(0), ym(1)],
        [xm(tEnd), ym(Math.exp(-lambdaMs * tEnd))],
      ],
      { stroke: PALETTE[1], "stroke-dasharray": "6 3", "stroke-width": 2 },
    ),
  );

  for (const pt of drawn) {
    parts.push(circle(xm(pt.t), ym(pt.p), 2.2, { fill: PALETTE[0], "fill-opacity": 0.8 }));
  }

  parts.push(
    legend(frame.x1 - 190, frame.y0 + 12, [
      { label: `empirical survival (n=${ok.length})`, color: PALETTE[0] },
      { label: `exp fit, rate ${lambda.toFixed(1)}/s`, color: PALETTE[1], dashed: true },
    ]),
  );

  return { width, height, parts };
}
