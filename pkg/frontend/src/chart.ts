import { Mapper, formatNumber } from "./scale.js";
import { line, px, tag, text } from "./svg.js";

/** Pixel bounds of one plot area; y0 is the top edge. */
export interface Frame {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export const PALETTE = ["#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377"];

export function axisBottom(
  frame: Frame,
  xm: Mapper,
  ticks: number[],
  label: string,
  fmt: (v: number) => string = formatNumber,
): string {
  const parts = [line(frame.x0, frame.y1, frame.x1, frame.y1)];
  for (const t of ticks) {
    const x = xm(t);
    parts.push(line(x, frame.y1, x, frame.y1 + 4));
    parts.push(text(x, frame.y1 + 16, fmt(t), { "text-anchor": "middle" }));
  }
  parts.push(
    text((frame.x0 + frame.x1) / 2, frame.y1 + 32, label, {
      "text-anchor": "middle",
      "font-size": 12,
    }),
  );
  return parts.join("");
}

export function axisLeft(
  frame: Frame,
  ym: Mapper,
  ticks: number[],
  label: string,
  fmt: (v: number) => string = formatNumber,
): string {
  const parts = [line(frame.x0, frame.y0, frame.x0, frame.y1)];
  for (const t of ticks) {
    const y = ym(t);
    parts.push(line(frame.x0 - 4, y, frame.x0, y));
    parts.push(text(frame.x0 - 7, y + 3.5, fmt(t), { "text-anchor": "end" }));
  }
  const cx = frame.x0 - 40;
  const cy = (frame.y0 + frame.y1) / 2;
  parts.push(
    text(cx, cy, label, {
      "text-anchor": "middle",
      "font-size": 12,
      transform: `rotate(-90 ${px(cx)} ${px(cy)})`,
    }),
  );
  return parts.join("");
}

export function axisRight(
  frame: Frame,
  ym: Mapper,
  ticks: number[],
  label: string,
  color: string,
  fmt: (v: number) => string = formatNumber,
): string {
  const parts = [line(frame.x1, frame.y0, frame.x1, frame.y1, { stroke: color })];
  for (const t of ticks) {
    const y = ym(t);
    parts.push(line(frame.x1, y, frame.x1 + 4, y, { stroke: color }));
    parts.push(text(frame.x1 + 7, y + 3.5, fmt(t), { fill: color }));
  }
  const cx = frame.x1 + 42;
  const cy = (frame.y0 + frame.y1) / 2;
  parts.push(
    text(cx, cy, label, {
      "text-anchor": "middle",
      "font-size": 12,
      fill: color,
      transform: `rotate(90 ${px(cx)} ${px(cy)})`,
    }),
  );
  return parts.join("");
}

export function gridLines(frame: Frame, ym: Mapper, ticks: number[]): string {
  return ticks
    .map((t) => line(frame.x0, ym(t), frame.x1, ym(t), { stroke: "#dddddd", "stroke-width": 0.5 }))
    .join("");
}

/** Vertical error bar with end caps. */
export function whisker(x: number, yLo: number, yHi: number, color: string): string {
  return [
    line(x, yLo, x, yHi, { stroke: color }),
    line(x - 3, yLo, x + 3, yLo, { stroke: color }),
    line(x - 3, yHi, x + 3, yHi, { stroke: color }),
  ].join("");
}

export interface LegendEntry {
  label: string;
  color: string;
  dashed?: boolean;
}

export function legend(x: number, y: number, entries: LegendEntry[]): string {
  const parts: string[] = [];
  entries.forEach((e, i) => {
    const ly = y + i * 15;
    parts.push(
      line(x, ly, x + 16, ly, {
        stroke: e.color,
        "stroke-width": 2,
        "stroke-dasharray": e.dashed ? "4 3" : undefined,
      }),
    );
    parts.push(text(x + 21, ly + 3.5, e.label));
  });
  return parts.join("");
}

export function panelTitle(frame: Frame, s: string): string {
  return text((frame.x0 + frame.x1) / 2, frame.y0 - 8, s, {
    "text-anchor": "middle",
    "font-size": 12,
    "font-weight": "bold",
  });
}

/** Category axis: one labelled tick per band center. */
export function bandAxisBottom(
  frame: Frame,
  centers: number[],
  labels: string[],
  label: string,
): string {
  const parts = [line(frame.x0, frame.y1, frame.x1, frame.y1)];
  centers.forEach((x, i) => {
    parts.push(line(x, frame.y1, x, frame.y1 + 4));
    parts.push(text(x, frame.y1 + 16, labels[i], { "text-anchor": "middle" }));
  });
  parts.push(
    text((frame.x0 + frame.x1) / 2, frame.y1 + 32, label, {
      "text-anchor": "middle",
      "font-size": 12,
    }),
  );
  return parts.join("");
}

/** Drawn contents of one figure before document chrome is added. */
export interface FigureBody {
  width: number;
  height: number;
  parts: string[];
}

/** Marker drawn at a data point; shape cycles with the series index. */
export function marker(x: number, y: number, color: string, series: number): string {
  if (series % 3 === 0) {
    return tag("circle", { cx: x, cy: y, r: 3, fill: color });
  }
  if (series % 3 === 1) {
    return tag("rect", { x: x - 2.6, y: y - 2.6, width: 5.2, height: 5.2, fill: color });
  }
  const pts = `${px(x)},${px(y - 3.2)} ${px(x - 3)},${px(y + 2.6)} ${px(x + 3)},${px(y + 2.6)}`;
  return tag("polygon", { points: pts, fill: color });
}
