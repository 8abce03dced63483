/**
 * Deterministic SVG renderer for grouped convergence curves.
 *
 * Output is a plain string with fixed number formatting, so re-rendering
 * identical inputs is byte-identical.
 */

import { Series } from "./series.js";

export interface FigureOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logY: boolean;
  width?: number;
  height?: number;
}

const PALETTE = [
  "#1b6ca8", "#d1495b", "#3a7d44", "#8338ec", "#e09f3e",
  "#00778f", "#9a3b3b", "#5f6f52", "#bb3e03", "#335c67",
];

const MARGIN = { left: 70, right: 20, top: 36, bottom: 48 };

function fmt(value: number): string {
  // fixed short formatting keeps the output byte-stable
  return value.toFixed(3).replace(/\.000$/, "");
}

function fmtTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 0.01 && magnitude < 10000) {
    return String(Number(value.toPrecision(4)));
  }
  return value.toExponential(1).replace("e", "e");
}

function niceTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const candidates = [step, 2 * step, 5 * step, 10 * step];
  const chosen = candidates.find((s) => span / s <= count) ?? 10 * step;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / chosen) * chosen; t <= hi + 1e-12 * span; t += chosen) {
    ticks.push(t);
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(lo); e <= Math.floor(hi); e++) {
    ticks.push(e);
  }
  if (ticks.length === 0) {
    ticks.push(lo, hi);
  }
  return ticks;
}

export function renderSvg(series: Series[], opts: FigureOptions): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const transformY = (y: number) => (opts.logY ? Math.log10(y) : y);
  const drawable = series
    .map((s) => {
      const points = s.x
        .map((x, i) => [x, s.y[i]] as [number, number])
        .filter(([, y]) => !opts.logY || y > 0);
      return { ...s, points };
    })
    .filter((s) => s.points.length > 0);

  let xLo = Infinity, xHi = -Infinity, yLo = Infinity, yHi = -Infinity;
  for (const s of drawable) {
    for (const [x, y] of s.points) {
      const ty = transformY(y);
      xLo = Math.min(xLo, x);
      xHi = Math.max(xHi, x);
      yLo = Math.min(yLo, ty);
      yHi = Math.max(yHi, ty);
    }
  }
  const empty = drawable.length === 0;
  if (empty) {
    xLo = 0; xHi = 1; yLo = 0; yHi = 1;
  }
  if (xHi === xLo) xHi = xLo + 1;
  if (yHi === yLo) yHi = yLo + 1;

  const sx = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) =>
    MARGIN.top + plotH - ((transformY(y) - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${width / 2}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">${opts.title}</text>`,
  );

  // axes box
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333333" stroke-width="1"/>`,
  );

  // ticks
  const xTicks = niceTicks(xLo, xHi, 8);
  for (const t of xTicks) {
    const px = sx(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${MARGIN.top + plotH}" x2="${fmt(px)}" y2="${MARGIN.top + plotH + 5}" stroke="#333333"/>`,
    );
    parts.push(
      `<text x="${fmt(px)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmtTick(t)}</text>`,
    );
  }
  const yTicks = opts.logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi, 6);
  for (const t of yTicks) {
    const py = MARGIN.top + plotH - ((t - yLo) / (yHi - yLo)) * plotH;
    const label = opts.logY ? `1e${fmtTick(t)}` : fmtTick(t);
    parts.push(
      `<line x1="${MARGIN.left - 5}" y1="${fmt(py)}" x2="${MARGIN.left}" y2="${fmt(py)}" stroke="#333333"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(py + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">${label}</text>`,
    );
  }

  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 10}" text-anchor="middle" font-family="sans-serif" font-size="12">${opts.xLabel}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${opts.yLabel}${opts.logY ? " (log)" : ""}</text>`,
  );

  // series: background (per-seed) first, then main curves
  const mainKeys = [...new Set(drawable.filter((s) => !s.background).map((s) => s.key))];
  const colorOf = (key: string) =>
    PALETTE[Math.max(0, mainKeys.indexOf(key.split(" seed=")[0])) % PALETTE.length];
  for (const s of drawable) {
    const pts = s.points.map(([x, y]) => `${fmt(sx(x))},${fmt(sy(y))}`).join(" ");
    const opacity = s.background ? "0.25" : "1";
    const widthAttr = s.background ? "1" : "1.8";
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${colorOf(s.key)}" stroke-width="${widthAttr}" stroke-opacity="${opacity}"/>`,
    );
  }

  // legend
  mainKeys.forEach((key, i) => {
    const y = MARGIN.top + 14 + 16 * i;
    const x = MARGIN.left + plotW - 190;
    parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 24}" y2="${y - 4}" stroke="${PALETTE[i % PALETTE.length]}" stroke-width="2"/>`,
    );
    parts.push(
      `<text x="${x + 30}" y="${y}" font-family="sans-serif" font-size="11">${key}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
