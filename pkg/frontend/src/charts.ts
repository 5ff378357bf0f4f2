/**
 * SVG chart rendering without a DOM: d3 scales compute the geometry and the
 * markup is assembled as strings. Every plotted point carries data-x/data-y
 * attributes with the raw values so tests (and curious readers) can check
 * the figure against the source CSV.
 */

import { scaleLinear, scaleLog } from "d3-scale";
import { line } from "d3-shape";

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  points: Point[];
}

export interface Panel {
  title: string;
  series: Series[];
}

export interface LineChartOptions {
  xLabel: string;
  yLabel: string;
  xLog?: boolean;
  yLog?: boolean;
}

const COLORS = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

const PANEL_W = 320;
const PANEL_H = 260;
const MARGIN = { top: 34, right: 14, bottom: 44, left: 56 };
const PANELS_PER_ROW = 3;

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmtTick(v: number): string {
  if (v !== 0 && (Math.abs(v) >= 1e4 || Math.abs(v) < 1e-3)) {
    return v.toExponential(0);
  }
  return `${Number(v.toPrecision(6))}`;
}

function makeScale(log: boolean | undefined, domain: [number, number], range: [number, number]) {
  if (log) {
    return scaleLog().domain(domain).range(range).nice();
  }
  return scaleLinear().domain(domain).range(range).nice();
}

function extent(values: number[], log: boolean | undefined): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v) && (!log || v > 0));
  if (finite.length === 0) return log ? [1, 10] : [0, 1];
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo = log ? lo / 2 : lo - 1;
    hi = log ? hi * 2 : hi + 1;
  }
  return [lo, hi];
}

function renderPanel(
  panel: Panel,
  colorOf: (label: string) => string,
  opts: LineChartOptions,
  ox: number,
  oy: number
): string {
  const innerW = PANEL_W - MARGIN.left - MARGIN.right;
  const innerH = PANEL_H - MARGIN.top - MARGIN.bottom;
  const xs = panel.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = panel.series.flatMap((s) => s.points.map((p) => p.y));
  const xScale = makeScale(opts.xLog, extent(xs, opts.xLog), [0, innerW]);
  const yScale = makeScale(opts.yLog, extent(ys, opts.yLog), [innerH, 0]);

  const parts: string[] = [];
  parts.push(`<g transform="translate(${ox + MARGIN.left},${oy + MARGIN.top})">`);
  parts.push(
    `<text x="${innerW / 2}" y="-14" text-anchor="middle" font-size="13" font-weight="bold">${esc(panel.title)}</text>`
  );
  parts.push(`<rect width="${innerW}" height="${innerH}" fill="none" stroke="#999"/>`);

  for (const tick of xScale.ticks(5)) {
    const tx = xScale(tick);
    parts.push(`<line x1="${tx}" y1="0" x2="${tx}" y2="${innerH}" stroke="#eee"/>`);
    parts.push(
      `<text x="${tx}" y="${innerH + 16}" text-anchor="middle" font-size="10">${fmtTick(tick)}</text>`
    );
  }
  for (const tick of yScale.ticks(5)) {
    const ty = yScale(tick);
    parts.push(`<line x1="0" y1="${ty}" x2="${innerW}" y2="${ty}" stroke="#eee"/>`);
    parts.push(
      `<text x="-6" y="${ty + 3}" text-anchor="end" font-size="10">${fmtTick(tick)}</text>`
    );
  }
  parts.push(
    `<text x="${innerW / 2}" y="${innerH + 34}" text-anchor="middle" font-size="11">${esc(opts.xLabel)}</text>`
  );
  parts.push(
    `<text transform="translate(${-MARGIN.left + 14},${innerH / 2}) rotate(-90)" text-anchor="middle" font-size="11">${esc(opts.yLabel)}</text>`
  );

  const path = line<Point>()
    .x((p) => xScale(p.x))
    .y((p) => yScale(p.y));
  for (const series of panel.series) {
    const color = colorOf(series.label);
    const pts = [...series.points].sort((a, b) => a.x - b.x);
    const d = path(pts);
    if (d) {
      parts.push(`<path d="${d}" fill="none" stroke="${color}" stroke-width="1.6"/>`);
    }
    for (const p of pts) {
      parts.push(
        `<circle cx="${xScale(p.x)}" cy="${yScale(p.y)}" r="2.6" fill="${color}" ` +
          `data-series="${esc(series.label)}" data-x="${p.x}" data-y="${p.y}"/>`
      );
    }
  }
  parts.push("</g>");
  return parts.join("\n");
}

export function lineChart(panels: Panel[], opts: LineChartOptions): string {
  const labels = [...new Set(panels.flatMap((p) => p.series.map((s) => s.label)))];
  const colorOf = (label: string) => COLORS[labels.indexOf(label) % COLORS.length];
  const cols = Math.min(PANELS_PER_ROW, Math.max(panels.length, 1));
  const rows = Math.ceil(panels.length / cols);
  const legendH = 24;
  const width = cols * PANEL_W;
  const height = rows * PANEL_H + legendH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" font-family="sans-serif">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  panels.forEach((panel, i) => {
    const ox = (i % cols) * PANEL_W;
    const oy = Math.floor(i / cols) * PANEL_H;
    parts.push(renderPanel(panel, colorOf, opts, ox, oy));
  });
  let lx = 14;
  const ly = rows * PANEL_H + 14;
  for (const label of labels) {
    parts.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${colorOf(label)}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 26}" y="${ly + 4}" font-size="11">${esc(label)}</text>`);
    lx += 34 + label.length * 6.4;
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export interface BarGroup {
  label: string;
  bars: { label: string; value: number }[];
}

export function barChart(
  groups: BarGroup[],
  opts: { yLabel: string; title: string }
): string {
  const width = Math.max(360, groups.length * 230);
  const height = 330;
  const margin = { top: 40, right: 16, bottom: 48, left: 72 };
  const innerW = width - margin.left - margin.right;
  const innerH = height - margin.top - margin.bottom;
  const values = groups.flatMap((g) => g.bars.map((b) => b.value));
  const yScale = scaleLog()
    .domain(extent(values, true))
    .range([innerH, 0])
    .nice();
  const barLabels = [...new Set(groups.flatMap((g) => g.bars.map((b) => b.label)))];
  const colorOf = (label: string) => COLORS[barLabels.indexOf(label) % COLORS.length];

  const groupW = innerW / Math.max(groups.length, 1);
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" font-family="sans-serif">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(`<g transform="translate(${margin.left},${margin.top})">`);
  parts.push(
    `<text x="${innerW / 2}" y="-18" text-anchor="middle" font-size="14" font-weight="bold">${esc(opts.title)}</text>`
  );
  parts.push(`<rect width="${innerW}" height="${innerH}" fill="none" stroke="#999"/>`);
  for (const tick of yScale.ticks(6)) {
    const ty = yScale(tick);
    parts.push(`<line x1="0" y1="${ty}" x2="${innerW}" y2="${ty}" stroke="#eee"/>`);
    parts.push(
      `<text x="-6" y="${ty + 3}" text-anchor="end" font-size="10">${fmtTick(tick)}</text>`
    );
  }
  parts.push(
    `<text transform="translate(${-margin.left + 16},${innerH / 2}) rotate(-90)" text-anchor="middle" font-size="11">${esc(opts.yLabel)}</text>`
  );
  groups.forEach((group, gi) => {
    const slot = groupW / (group.bars.length + 1);
    group.bars.forEach((bar, bi) => {
      const bx = gi * groupW + slot * (bi + 0.5);
      const by = yScale(bar.value);
      parts.push(
        `<rect x="${bx}" y="${by}" width="${slot * 0.8}" height="${innerH - by}" ` +
          `fill="${colorOf(bar.label)}" data-bar="${esc(bar.label)}" data-value="${bar.value}"/>`
      );
    });
    parts.push(
      `<text x="${gi * groupW + groupW / 2}" y="${innerH + 18}" text-anchor="middle" font-size="11">${esc(group.label)}</text>`
    );
  });
  parts.push("</g>");
  let lx = margin.left;
  const ly = height - 10;
  for (const label of barLabels) {
    parts.push(`<rect x="${lx}" y="${ly - 9}" width="11" height="11" fill="${colorOf(label)}"/>`);
    parts.push(`<text x="${lx + 15}" y="${ly}" font-size="11">${esc(label)}</text>`);
    lx += 26 + label.length * 6.4;
  }
  parts.push("</svg>");
  return parts.join("\n");
}
