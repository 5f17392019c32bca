#!/usr/bin/env node
/**
 * entcap-plots render --spec <plotspec.json>
 *
 * Reads capability-sweep CSVs named by the spec, writes the SVG image to the
 * spec's output path and the plotted triples to "<output>.data".
 */

import { readFileSync, writeFileSync } from "node:fs";
import { resolve, dirname } from "node:path";

import { parseSweepCsv, SweepRow } from "./csv.js";
import { parsePlotSpec } from "./plotspec.js";
import { renderPlot } from "./render.js";

export function sidecarPath(output: string): string {
  return `${output}.data`;
}

export function runRender(specPath: string): { output: string; sidecar: string; skipped: number } {
  const specText = readFileSync(specPath, "utf8");
  const spec = parsePlotSpec(specText, specPath);
  const base = dirname(resolve(specPath));
  const rows: SweepRow[] = [];
  for (const input of spec.inputs) {
    const path = resolve(base, input);
    rows.push(...parseSweepCsv(readFileSync(path, "utf8"), path));
  }
  const result = renderPlot(rows, spec);
  const outPath = resolve(base, spec.output);
  writeFileSync(outPath, result.svg);
  writeFileSync(sidecarPath(outPath), result.sidecar);
  return { output: outPath, sidecar: sidecarPath(outPath), skipped: result.skippedRows };
}

export function main(argv: string[]): number {
  if (argv.length !== 3 || argv[0] !== "render" || argv[1] !== "--spec") {
    process.stderr.write("usage: entcap-plots render --spec <plotspec.json>\n");
    return 2;
  }
  try {
    const { output, sidecar, skipped } = runRender(argv[2]);
    process.stderr.write(`wrote ${output} and ${sidecar} (${skipped} rows skipped)\n`);
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
