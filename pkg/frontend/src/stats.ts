export function mean(xs: number[]): number {
  if (xs.length === 0) {
    return 0;
  }
  return xs.reduce((a, b) => a + b, 0) / xs.length;
}

export interface SurvivalPoint {
  t: number;
  p: number;
}

/** Empirical survival curve with Hazen plotting positions, so every point
 * has p > 0 and can sit on a log axis. */
export function survivalPoints(samples: number[]): SurvivalPoint[] {
  const sorted = [...samples].sort((a, b) => a - b);
  const n = sorted.length;
  return sorted.map((t, i) => ({ t, p: 1 - (i + 0.5) / n }));
}

export interface LineFit {
  slope: number;
  intercept: number;
  r2: number;
}

/** Least-squares fit of ln(y) against x. Exponential tails land on a
 * straight line here, so r2 measures log-linearity directly. */
export function logLinearFit(xs: number[], ys: number[]): LineFit {
  if (xs.length !== ys.length || xs.length < 2) {
    throw new Error(`need two equal-length arrays, got ${xs.length} and ${ys.length}`);
  }
  const ly = ys.map((y) => {
    if (y <= 0) {
      throw new Error(`log-linear fit needs positive y values, got ${y}`);
    }
    return Math.log(y);
  });
  const n = xs.length;
  const mx = mean(xs);
  const my = mean(ly);
  let sxx = 0;
  let sxy = 0;
  let syy = 0;
  for (let i = 0; i < n; i++) {
    const dx = xs[i] - mx;
    const dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const slope = sxy / sxx;
  const intercept = my - slope * mx;
  const r2 = syy === 0 ? 1 : (sxy * sxy) / (sxx * syy);
  return { slope, intercept, r2 };
}
