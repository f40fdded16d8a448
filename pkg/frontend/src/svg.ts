export type Attrs = Record<string, string | number | undefined>;

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Coordinates rounded to 0.01 px keep the output small and byte-stable. */
export function px(v: number): string {
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
}

export function tag(name: string, attrs: Attrs = {}, children: string | string[] = ""): string {
  const parts: string[] = [];
  for (const [k, v] of Object.entries(attrs)) {
    if (v === undefined) {
      continue;
    }
    parts.push(` ${k}="${typeof v === "number" ? px(v) : esc(v)}"`);
  }
  const body = Array.isArray(children) ? children.join("") : children;
  if (body === "") {
    return `<${name}${parts.join("")}/>`;
  }
  return `<${name}${parts.join("")}>${body}</${name}>`;
}

export function text(x: number, y: number, s: string, attrs: Attrs = {}): string {
  return tag("text", { x, y, "font-family": "sans-serif", "font-size": 11, ...attrs }, esc(s));
}

export function line(x1: number, y1: number, x2: number, y2: number, attrs: Attrs = {}): string {
  return tag("line", { x1, y1, x2, y2, stroke: "#333333", "stroke-width": 1, ...attrs });
}

export function rect(x: number, y: number, w: number, h: number, attrs: Attrs = {}): string {
  return tag("rect", { x, y, width: w, height: h, ...attrs });
}

export function circle(cx: number, cy: number, r: number, attrs: Attrs = {}): string {
  return tag("circle", { cx, cy, r, ...attrs });
}

export function polyline(points: Array<[number, number]>, attrs: Attrs = {}): string {
  const pts = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  return tag("polyline", { points: pts, fill: "none", "stroke-width": 1.5, ...attrs });
}

export function svgDocument(width: number, height: number, children: string[]): string {
  const open =
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}">`;
  const bg = rect(0, 0, width, height, { fill: "#ffffff" });
  return `${open}${bg}${children.join("")}</svg>\n`;
}
