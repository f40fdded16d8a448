import {
  FigureBody,
  Frame,
  PALETTE,
  axisBottom,
  axisLeft,
  gridLines,
  marker,
  panelTitle,
} from "../chart.js";
import { Manifest, readTable } from "../manifest.js";
import { numericColumn } from "../csv.js";
import { linearScale, linearTicks, logScale, logTicks } from "../scale.js";
import { polyline } from "../svg.js";

interface Curve {
  x: number[];
  y: number[];
  xLabel: string;
  title: string;
}

function readCurve(
  manifest: Manifest,
  file: string,
  column: string,
  xScale: number,
  xLabel: string,
  title: string,
): Curve {
  const table = readTable(manifest, file);
  return {
    x: numericColumn(table, column).map((v) => v * xScale),
    y: numericColumn(table, "lambda_ss"),
    xLabel,
    title,
  };
}

function drawCurve(frame: Frame, curve: Curve): string[] {
  const parts: string[] = [];
  const xLo = Math.min(...curve.x) / 1.3;
  const xHi = Math.max(...curve.x) * 1.3;
  const xm = logScale([xLo, xHi], [frame.x0, frame.x1]);
  const yMax = Math.max(...curve.y) * 1.12;
  const ym = linearScale([0, yMax], [frame.y1, frame.y0]);
  const yTicks = linearTicks(0, yMax);

  parts.push(gridLines(frame, ym, yTicks));
  parts.push(axisBottom(frame, xm, logTicks(xLo, xHi), curve.xLabel));
  parts.push(axisLeft(frame, ym, yTicks, "fitted rate (1/s)"));
  parts.push(panelTitle(frame, curve.title));

  const pts = curve.x.map((v, i) => [xm(v), ym(curve.y[i])] as [number, number]);
  parts.push(polyline(pts, { stroke: PALETTE[0], "stroke-width": 2 }));
  pts.forEach(([x, y]) => parts.push(marker(x, y, PALETTE[0], 0)));
  return parts;
}

/** Fitted entanglement rate against the two swept source parameters:
 * scatterer reset time and emitter detuning. */
export function rateCurves(manifest: Manifest): FigureBody {
  const tau = readCurve(
    manifest,
    "lambda_vs_tau0.csv",
    "tau_reset",
    1e6,
    "reset time (µs)",
    "rate vs reset time",
  );
  const domega = readCurve(
    manifest,
    "lambda_vs_domega.csv",
    "delta_omega",
    1 / (2 * Math.PI * 1e9),
    "detuning / 2π (GHz)",
    "rate vs detuning",
  );

  const width = 880;
  const height = 392;
  const leftFrame: Frame = { x0: 66, y0: 44, x1: 406, y1: 330 };
  const rightFrame: Frame = { x0: 520, y0: 44, x1: 860, y1: 330 };

  return {
    width,
    height,
    parts: [...drawCurve(leftFrame, tau), ...drawCurve(rightFrame, domega)],
  };
}
