/**
 * Figure assembly: read harness CSVs, group series, render to SVG or PNG.
 */

import { writeFileSync } from "fs";
import { basename, extname } from "path";

import { readCsv, Table } from "./csv.js";
import { extractSeries, Series, SeriesOptions } from "./series.js";
import { Canvas, encodePng } from "./png.js";
import { FigureOptions, renderSvg } from "./svg.js";

export interface PlotSpec {
  csvPaths: string[];
  x: string;                 // iteration (k), outer_samples, or time_s
  y: string;
  logY: boolean;
  group: string[];           // series grouping columns, default method,N
  perSeed: boolean;
  out: string;
  title?: string;
}

const PALETTE_RGB: [number, number, number][] = [
  [27, 108, 168], [209, 73, 91], [58, 125, 68], [131, 56, 236],
  [224, 159, 62], [0, 119, 143], [154, 59, 59], [95, 111, 82],
];

export function buildSeries(spec: PlotSpec): Series[] {
  const tables: Table[] = spec.csvPaths.map(readCsv);
  const opts: SeriesOptions = {
    x: spec.x, y: spec.y, group: spec.group, perSeed: spec.perSeed,
  };
  return extractSeries(tables, opts);
}

function renderPng(series: Series[], spec: PlotSpec): Buffer {
  const width = 720;
  const height = 480;
  const margin = { left: 60, right: 20, top: 24, bottom: 36 };
  const canvas = new Canvas(width, height);

  const transform = (y: number) => (spec.logY ? Math.log10(y) : y);
  const drawable = series
    .map((s) => ({
      ...s,
      points: s.x
        .map((x, i) => [x, s.y[i]] as [number, number])
        .filter(([, y]) => !spec.logY || y > 0),
    }))
    .filter((s) => s.points.length > 0);

  let xLo = Infinity, xHi = -Infinity, yLo = Infinity, yHi = -Infinity;
  for (const s of drawable) {
    for (const [x, y] of s.points) {
      xLo = Math.min(xLo, x);
      xHi = Math.max(xHi, x);
      yLo = Math.min(yLo, transform(y));
      yHi = Math.max(yHi, transform(y));
    }
  }
  if (drawable.length === 0) {
    xLo = 0; xHi = 1; yLo = 0; yHi = 1;
  }
  if (xHi === xLo) xHi = xLo + 1;
  if (yHi === yLo) yHi = yLo + 1;

  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;
  const sx = (x: number) => margin.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) =>
    margin.top + plotH - ((transform(y) - yLo) / (yHi - yLo)) * plotH;

  const black: [number, number, number] = [40, 40, 40];
  canvas.line(margin.left, margin.top, margin.left, margin.top + plotH, black);
  canvas.line(margin.left, margin.top + plotH, margin.left + plotW,
              margin.top + plotH, black);

  const mainKeys = [...new Set(drawable.filter((s) => !s.background).map((s) => s.key))];
  for (const s of drawable) {
    const color = PALETTE_RGB[
      Math.max(0, mainKeys.indexOf(s.key.split(" seed=")[0])) % PALETTE_RGB.length];
    for (let i = 1; i < s.points.length; i++) {
      canvas.line(sx(s.points[i - 1][0]), sy(s.points[i - 1][1]),
                  sx(s.points[i][0]), sy(s.points[i][1]), color);
    }
  }
  return encodePng(canvas);
}

/** Renders the spec to `spec.out`; the format follows the file extension
 * (.svg vector, anything else the lossless PNG raster). */
export function render(spec: PlotSpec): string {
  const series = buildSeries(spec);
  const title = spec.title ?? basename(spec.out).replace(/\.[^.]*$/, "");
  if (extname(spec.out).toLowerCase() === ".svg") {
    const figure: FigureOptions = {
      title, xLabel: spec.x, yLabel: spec.y, logY: spec.logY,
    };
    writeFileSync(spec.out, renderSvg(series, figure), "utf-8");
  } else {
    const out = extname(spec.out) === "" ? `${spec.out}.png` : spec.out;
    writeFileSync(out, renderPng(series, spec));
    return out;
  }
  return spec.out;
}
