/**
 * Series assembly and deterministic SVG + sidecar rendering.
 *
 * The sidecar data file is the testable artifact: it lists every plotted
 * (series, x, y) triple, with y copied verbatim from the CSV for data
 * series.  Rendering has no timestamps and no randomness, so identical
 * inputs give identical bytes.
 */

import { SweepRow } from "./csv.js";
import { ewBound } from "./bounds.js";
import { PlotSpec } from "./plotspec.js";

export interface SeriesPoint {
  x: number;
  y: number;
  /** verbatim CSV token for data points; formatted number for overlays */
  yToken: string;
}

export interface Series {
  name: string;
  points: SeriesPoint[];
  overlay: boolean;
}

export interface RenderResult {
  svg: string;
  sidecar: string;
  series: Series[];
  skippedRows: number;
}

function seriesName(row: SweepRow, fields: string[]): string {
  return fields
    .map((f) => {
      switch (f) {
        case "criterion":
          return row.criterion;
        case "d":
          return `d=${row.dA * row.dB}`;
        case "k":
          return `k=${row.k}`;
        case "experiment_id":
          return row.experimentId;
        default:
          throw new Error(`unknown series field ${f}`);
      }
    })
    .join(" ");
}

export function buildSeries(rows: SweepRow[], spec: PlotSpec): { series: Series[]; skipped: number } {
  const groups = new Map<string, SeriesPoint[]>();
  let skipped = 0;
  for (const row of rows) {
    if (row.error !== "") {
      skipped++;
      continue;
    }
    if (spec.logY && row.nDetected === 0) {
      skipped++; // a log axis cannot carry zero-count points honestly
      continue;
    }
    const name = seriesName(row, spec.seriesBy);
    const x = spec.x === "k" ? row.k : row.dA * row.dB;
    const pts = groups.get(name) ?? [];
    pts.push({ x, y: row.pHat, yToken: row.pHatToken });
    groups.set(name, pts);
  }
  const series: Series[] = [...groups.entries()]
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([name, points]) => ({
      name,
      points: points.sort((p, q) => p.x - q.x),
      overlay: false,
    }));
  return { series, skipped };
}

function overlaySeries(spec: PlotSpec, dataSeries: Series[]): Series[] {
  if (spec.overlays.length === 0) {
    return [];
  }
  const ks = new Set<number>();
  for (const s of dataSeries) {
    for (const p of s.points) {
      ks.add(p.x);
    }
  }
  const grid = [...ks].sort((a, b) => a - b);
  return spec.overlays.map((o) => ({
    name: o.label,
    points: grid.map((k) => {
      const y = ewBound(o.alpha, k);
      return { x: k, y, yToken: String(y) };
    }),
    overlay: true,
  }));
}

export function buildSidecar(series: Series[], skipped: number): string {
  const lines: string[] = ["# series\tx\ty"];
  for (const s of series) {
    for (const p of s.points) {
      lines.push(`${s.name}\t${p.x}\t${p.yToken}`);
    }
  }
  lines.push(`# skipped_rows = ${skipped}`);
  return lines.join("\n") + "\n";
}

const PALETTE = ["#1b6ca8", "#d1495b", "#3a7d44", "#8d5a97", "#c97b2d", "#3b8ea5", "#6b4226", "#444444"];

const WIDTH = 800;
const HEIGHT = 500;
const MARGIN = { left: 75, right: 25, top: 45, bottom: 55 };

function niceTicks(lo: number, hi: number, n: number): number[] {
  if (!(hi > lo)) {
    return [lo];
  }
  const span = hi - lo;
  const step = Math.max(1, Math.round(span / n));
  const ticks: number[] = [];
  for (let t = Math.ceil(lo); t <= hi; t += step) {
    ticks.push(t);
  }
  return ticks;
}

export function renderSvg(series: Series[], spec: PlotSpec): string {
  const all = series.flatMap((s) => s.points);
  const xs = all.map((p) => p.x);
  const ys = all.map((p) => p.y).filter((y) => (spec.logY ? y > 0 : true));
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  let yLo = Math.min(...ys);
  let yHi = Math.max(...ys);
  if (spec.logY) {
    yLo = Math.floor(Math.log10(yLo));
    yHi = Math.ceil(Math.log10(yHi));
    if (yHi === yLo) {
      yHi = yLo + 1;
    }
  } else if (yHi === yLo) {
    yHi = yLo + 1;
  }

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + ((x - xLo) / (xHi - xLo || 1)) * plotW;
  const sy = (y: number) => {
    const v = spec.logY ? Math.log10(y) : y;
    return MARGIN.top + (1 - (v - yLo) / (yHi - yLo)) * plotH;
  };

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
  );
  if (spec.title) {
    parts.push(
      `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">${spec.title}</text>`,
    );
  }
  // frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#222" stroke-width="1"/>`,
  );
  // x ticks
  for (const t of niceTicks(xLo, xHi, 10)) {
    const px = sx(t).toFixed(2);
    parts.push(
      `<line x1="${px}" y1="${MARGIN.top + plotH}" x2="${px}" y2="${MARGIN.top + plotH + 5}" stroke="#222"/>`,
      `<text x="${px}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" font-family="sans-serif" font-size="12">${t}</text>`,
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">${spec.x}</text>`,
  );
  // y ticks
  if (spec.logY) {
    for (let e = yLo; e <= yHi; e++) {
      const py = sy(10 ** e).toFixed(2);
      parts.push(
        `<line x1="${MARGIN.left - 5}" y1="${py}" x2="${MARGIN.left}" y2="${py}" stroke="#222"/>`,
        `<text x="${MARGIN.left - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="12">1e${e}</text>`,
      );
    }
  } else {
    for (let i = 0; i <= 5; i++) {
      const v = yLo + ((yHi - yLo) * i) / 5;
      const py = sy(v).toFixed(2);
      parts.push(
        `<line x1="${MARGIN.left - 5}" y1="${py}" x2="${MARGIN.left}" y2="${py}" stroke="#222"/>`,
        `<text x="${MARGIN.left - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="12">${v.toPrecision(3)}</text>`,
      );
    }
  }
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">detection capability</text>`,
  );

  let colorIdx = 0;
  const legend: { name: string; color: string; dashed: boolean }[] = [];
  for (const s of series) {
    const visible = s.points.filter((p) => !spec.logY || p.y > 0);
    if (visible.length === 0) {
      continue;
    }
    const color = s.overlay ? "#555555" : PALETTE[colorIdx++ % PALETTE.length];
    const dash = s.overlay ? ' stroke-dasharray="6 4"' : "";
    const coords = visible.map((p) => `${sx(p.x).toFixed(2)},${sy(p.y).toFixed(2)}`).join(" ");
    parts.push(
      `<polyline points="${coords}" fill="none" stroke="${color}" stroke-width="1.5"${dash}/>`,
    );
    if (!s.overlay) {
      for (const p of visible) {
        parts.push(
          `<circle cx="${sx(p.x).toFixed(2)}" cy="${sy(p.y).toFixed(2)}" r="2.5" fill="${color}"/>`,
        );
      }
    }
    legend.push({ name: s.name, color, dashed: s.overlay });
  }
  legend.forEach((item, i) => {
    const y = MARGIN.top + 14 + i * 18;
    const x = MARGIN.left + plotW - 220;
    const dash = item.dashed ? ' stroke-dasharray="6 4"' : "";
    parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 26}" y2="${y - 4}" stroke="${item.color}" stroke-width="1.5"${dash}/>`,
      `<text x="${x + 32}" y="${y}" font-family="sans-serif" font-size="12">${item.name}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function renderPlot(rows: SweepRow[], spec: PlotSpec): RenderResult {
  const { series: dataSeries, skipped } = buildSeries(rows, spec);
  if (dataSeries.length === 0) {
    throw new Error("no plottable rows after filtering (errors and zero counts are dropped)");
  }
  const overlays = overlaySeries(spec, dataSeries);
  const series = [...dataSeries, ...overlays];
  return {
    svg: renderSvg(series, spec),
    sidecar: buildSidecar(series, skipped),
    series,
    skippedRows: skipped,
  };
}
