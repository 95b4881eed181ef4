/** Dependency-free SVG chart builders. Pure functions from data to markup
 * so the geometry is unit-testable without a DOM. */

export interface Margins {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

const M: Margins = { top: 12, right: 12, bottom: 34, left: 52 };

export interface Scale {
  (v: number): number;
  min: number;
  max: number;
}

export function linearScale(min: number, max: number, outMin: number, outMax: number): Scale {
  const span = max - min || 1;
  const fn = ((v: number) => outMin + ((v - min) / span) * (outMax - outMin)) as Scale;
  fn.min = min;
  fn.max = max;
  return fn;
}

export function niceDomain(values: number[]): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v));
  if (!finite.length) return [0, 1];
  let lo = Math.min(...finite, 0);
  let hi = Math.max(...finite, 0);
  if (lo === hi) hi = lo + 1;
  const pad = (hi - lo) * 0.06;
  return [lo === 0 ? 0 : lo - pad, hi + pad];
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function axis(x: Scale, y: Scale, w: number, h: number, xLabel: string): string {
  const ticksY = 4;
  let out = "";
  for (let i = 0; i <= ticksY; i++) {
    const v = y.min + ((y.max - y.min) * i) / ticksY;
    const yy = y(v);
    out += `<line x1="${M.left}" y1="${yy}" x2="${w - M.right}" y2="${yy}" stroke="#e3e3e8"/>`;
    out += `<text x="${M.left - 6}" y="${yy + 4}" text-anchor="end" class="tick">${v.toFixed(Math.abs(y.max - y.min) < 10 ? 1 : 0)}</text>`;
  }
  out += `<line x1="${M.left}" y1="${y(0) <= h - M.bottom ? Math.min(y(0), h - M.bottom) : h - M.bottom}" x2="${w - M.right}" y2="${Math.min(y(0), h - M.bottom)}" stroke="#9a9aa2"/>`;
  out += `<text x="${(M.left + w - M.right) / 2}" y="${h - 6}" text-anchor="middle" class="tick">${esc(xLabel)}</text>`;
  return out;
}

export interface Series {
  label: string;
  color: string;
  points: [number, number][];
}

/** Polyline chart; vertical discontinuities are drawn as separate moves. */
export function lineChart(
  series: Series[],
  width = 420,
  height = 220,
  xLabel = "",
): string {
  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  if (!xs.length) return emptySvg(width, height);
  const [yLo, yHi] = niceDomain(ys);
  const x = linearScale(Math.min(...xs), Math.max(...xs), M.left, width - M.right);
  const y = linearScale(yLo, yHi, height - M.bottom, M.top);
  let body = axis(x, y, width, height, xLabel);
  for (const s of series) {
    const d = s.points
      .map(([px, py], i) => `${i === 0 ? "M" : "L"}${x(px).toFixed(2)},${y(py).toFixed(2)}`)
      .join(" ");
    body += `<path d="${d}" fill="none" stroke="${s.color}" stroke-width="2"/>`;
    for (const [px, py] of s.points) {
      body += `<circle cx="${x(px).toFixed(2)}" cy="${y(py).toFixed(2)}" r="2.6" fill="${s.color}"/>`;
    }
  }
  let lx = M.left + 8;
  for (const s of series) {
    body += `<rect x="${lx}" y="${M.top}" width="10" height="10" fill="${s.color}"/>`;
    body += `<text x="${lx + 14}" y="${M.top + 9}" class="tick">${esc(s.label)}</text>`;
    lx += 14 + 8 * s.label.length + 18;
  }
  return svg(width, height, body);
}

/** Bar chart keyed by category; optional overlay markers (e.g. the repaired
 * caseload on top of the current one). */
export function barChart(
  labels: string[],
  values: number[],
  width = 720,
  height = 240,
  color = "#4878d0",
  overlay?: number[],
): string {
  if (!labels.length) return emptySvg(width, height);
  const [yLo, yHi] = niceDomain([...values, ...(overlay ?? [])]);
  const y = linearScale(yLo, yHi, height - M.bottom, M.top);
  const x0 = M.left;
  const bw = (width - M.left - M.right) / labels.length;
  let body = axis(linearScale(0, 1, x0, width - M.right), y, width, height, "");
  labels.forEach((label, i) => {
    const v = values[i] ?? 0;
    const xx = x0 + i * bw + bw * 0.15;
    const yz = y(Math.max(0, yLo));
    body += `<rect x="${xx.toFixed(2)}" y="${Math.min(y(v), yz).toFixed(2)}" width="${(bw * 0.7).toFixed(2)}" height="${Math.abs(y(v) - yz).toFixed(2)}" fill="${color}" opacity="0.85"><title>${esc(label)}: ${v}</title></rect>`;
    if (overlay && overlay[i] !== undefined) {
      const ov = overlay[i]!;
      body += `<line x1="${xx.toFixed(2)}" x2="${(xx + bw * 0.7).toFixed(2)}" y1="${y(ov).toFixed(2)}" y2="${y(ov).toFixed(2)}" stroke="#d65f5f" stroke-width="2.5"><title>${esc(label)} repaired: ${ov}</title></line>`;
    }
    body += `<text x="${(xx + bw * 0.35).toFixed(2)}" y="${height - M.bottom + 12}" text-anchor="end" transform="rotate(-55 ${(xx + bw * 0.35).toFixed(2)} ${height - M.bottom + 12})" class="tick">${esc(label)}</text>`;
  });
  return svg(width, height, body);
}

/** Curve preview from server-sampled points; draws jump discontinuities as
 * dashed vertical risers instead of slanted interpolation. */
export function plfChart(
  x: number[],
  u: number[],
  jumps: [number, number][],
  width = 420,
  height = 240,
): string {
  if (!x.length) return emptySvg(width, height);
  const [yLo, yHi] = niceDomain(u);
  const sx = linearScale(x[0]!, x[x.length - 1]!, M.left, width - M.right);
  const sy = linearScale(yLo, yHi, height - M.bottom, M.top);
  const jumpXs = jumps.map(([jx]) => jx);
  let d = "";
  for (let i = 0; i < x.length; i++) {
    const cmd = i === 0 ? "M" : jumpCrossed(x[i - 1]!, x[i]!, jumpXs) ? "M" : "L";
    d += `${cmd}${sx(x[i]!).toFixed(2)},${sy(u[i]!).toFixed(2)} `;
  }
  let body = axis(sx, sy, width, height, "output (patients)");
  for (const [jx] of jumps) {
    body += `<line x1="${sx(jx).toFixed(2)}" x2="${sx(jx).toFixed(2)}" y1="${M.top}" y2="${height - M.bottom}" stroke="#d65f5f" stroke-dasharray="4 3" opacity="0.7"/>`;
  }
  body += `<path d="${d.trim()}" fill="none" stroke="#4878d0" stroke-width="2"/>`;
  return svg(width, height, body);
}

function jumpCrossed(a: number, b: number, jumps: number[]): boolean {
  return jumps.some((j) => a < j && j <= b);
}

/** Per-group min-max band chart for case-mix variation across a sweep. */
export function rangeChart(
  groups: string[],
  ranges: Record<string, { min_pct: number; max_pct: number }>,
  width = 720,
  height = 220,
): string {
  const present = groups.filter((g) => ranges[g]);
  if (!present.length) return emptySvg(width, height);
  const values = present.flatMap((g) => [ranges[g]!.min_pct, ranges[g]!.max_pct]);
  const [yLo, yHi] = niceDomain(values);
  const y = linearScale(yLo, yHi, height - M.bottom, M.top);
  const bw = (width - M.left - M.right) / present.length;
  let body = axis(linearScale(0, 1, M.left, width - M.right), y, width, height, "");
  present.forEach((g, i) => {
    const lo = ranges[g]!.min_pct;
    const hi = ranges[g]!.max_pct;
    const xx = M.left + i * bw + bw * 0.35;
    body += `<rect x="${xx.toFixed(2)}" y="${y(hi).toFixed(2)}" width="${(bw * 0.3).toFixed(2)}" height="${Math.max(1.5, y(lo) - y(hi)).toFixed(2)}" fill="#4878d0" opacity="0.85"><title>${esc(g)}: ${lo} .. ${hi}%</title></rect>`;
    body += `<text x="${(xx + bw * 0.15).toFixed(2)}" y="${height - M.bottom + 12}" text-anchor="end" transform="rotate(-55 ${(xx + bw * 0.15).toFixed(2)} ${height - M.bottom + 12})" class="tick">${esc(g)}</text>`;
  });
  return svg(width, height, body);
}

function svg(width: number, height: number, body: string): string {
  return (
    `<svg viewBox="0 0 ${width} ${height}" xmlns="http://www.w3.org/2000/svg" ` +
    `font-family="system-ui, sans-serif">` +
    `<style>.tick{font-size:10px;fill:#555}</style>${body}</svg>`
  );
}

function emptySvg(width: number, height: number): string {
  return svg(width, height, `<text x="${width / 2}" y="${height / 2}" text-anchor="middle" class="tick">no data</text>`);
}
