export type Mapper = (v: number) => number;

export function linearScale(domain: [number, number], range: [number, number]): Mapper {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  if (span === 0) {
    return () => (r0 + r1) / 2;
  }
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

export function logScale(domain: [number, number], range: [number, number]): Mapper {
  const [d0, d1] = domain;
  if (d0 <= 0 || d1 <= 0) {
    throw new Error(`log scale needs a positive domain, got [${d0}, ${d1}]`);
  }
  const inner = linearScale([Math.log10(d0), Math.log10(d1)], range);
  return (v: number) => inner(Math.log10(v));
}

/** Round ticks at a 1/2/5 step covering [lo, hi]. */
export function linearTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const step0 = (hi - lo) / Math.max(1, count);
  const mag = 10 ** Math.floor(Math.log10(step0));
  const norm = step0 / mag;
  const step = (norm <= 1 ? 1 : norm <= 2 ? 2 : norm <= 5 ? 5 : 10) * mag;
  const out: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

/** Decade ticks; {1,2,5} mantissas when the domain spans few decades. */
export function logTicks(lo: number, hi: number): number[] {
  const eLo = Math.floor(Math.log10(lo));
  const eHi = Math.ceil(Math.log10(hi));
  const mantissas = eHi - eLo > 3 ? [1] : [1, 2, 5];
  const out: number[] = [];
  for (let e = eLo; e <= eHi; e++) {
    for (const m of mantissas) {
      const v = Number((m * 10 ** e).toPrecision(12));
      if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) {
        out.push(v);
      }
    }
  }
  return out;
}

/** Pad a degenerate or tight domain so points never sit on the frame. */
export function padDomain(lo: number, hi: number, frac = 0.05): [number, number] {
  if (hi === lo) {
    const pad = lo === 0 ? 1 : Math.abs(lo) * 0.5;
    return [lo - pad, hi + pad];
  }
  const pad = (hi - lo) * frac;
  return [lo - pad, hi + pad];
}

export function formatNumber(v: number): string {
  if (v === 0) {
    return "0";
  }
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const e = Math.floor(Math.log10(a));
    const mant = Number((v / 10 ** e).toPrecision(3));
    return mant === 1 ? `1e${e}` : `${mant}e${e}`;
  }
  return String(Number(v.toPrecision(6)));
}
