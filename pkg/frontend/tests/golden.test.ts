import { mkdtempSync, readFileSync, cpSync, readdirSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { parseSweepCsv } from "../src/csv.js";
import { runRender, sidecarPath } from "../src/cli.js";

const FIXTURES = join(__dirname, "fixtures");

// 2 exp(-(sqrt(2)-1)^2 k) for k = 1..25, computed by the engine's bounds module
const EW_BOUND_ALPHA1 = [
  1.6846777602470782, 1.419069577935556, 1.1953374790956195, 1.0068792335110985,
  0.8481335259753862, 0.7144158444653352, 0.6017802423694429, 0.5069028954379485,
  0.4269840172745811, 0.35966523894172053, 0.3029600145895339, 0.25519499941155904,
  0.21496067001745991, 0.18106973005311278, 0.1525220736372106, 0.12847527270168793,
  0.10821971733110608, 0.09115767550396987, 0.07678565429867895, 0.06467954205150246,
  0.05448209301856593, 0.0458923852200453, 0.03865694037245103, 0.03256224386233281,
  0.02742844402930702,
];

function stage(): string {
  const dir = mkdtempSync(join(tmpdir(), "entcap-plots-"));
  for (const name of readdirSync(FIXTURES)) {
    cpSync(join(FIXTURES, name), join(dir, name));
  }
  return dir;
}

describe("fig2a golden pipeline", () => {
  it("sidecar triples are exact copies of the CSV p_hat tokens", () => {
    const dir = stage();
    const { sidecar } = runRender(join(dir, "fig2a.plotspec.json"));
    const lines = readFileSync(sidecar, "utf8").split("\n");

    const expected = new Set<string>();
    for (const csvName of readdirSync(FIXTURES).filter((n) => n.endsWith(".csv"))) {
      for (const row of parseSweepCsv(readFileSync(join(FIXTURES, csvName), "utf8"))) {
        if (row.error === "" && row.nDetected > 0) {
          expected.add(`${row.criterion} d=${row.dA * row.dB}\t${row.k}\t${row.pHatToken}`);
        }
      }
    }
    const dataLines = lines.filter(
      (l) => l.length > 0 && !l.startsWith("#") && !l.startsWith("bound "),
    );
    expect(new Set(dataLines)).toEqual(expected);
  });

  it("overlay values match the engine bound within 1e-9", () => {
    const dir = stage();
    const { sidecar } = runRender(join(dir, "fig2a.plotspec.json"));
    const overlayLines = readFileSync(sidecar, "utf8")
      .split("\n")
      .filter((l) => l.startsWith("bound alpha=1\t"));
    expect(overlayLines.length).toBeGreaterThan(0);
    for (const line of overlayLines) {
      const [, k, y] = line.split("\t");
      expect(Math.abs(Number(y) - EW_BOUND_ALPHA1[Number(k) - 1])).toBeLessThan(1e-9);
    }
  });

  it("sidecar bytes are stable across two renders", () => {
    const dirA = stage();
    const dirB = stage();
    const a = runRender(join(dirA, "fig2a.plotspec.json"));
    const b = runRender(join(dirB, "fig2a.plotspec.json"));
    expect(readFileSync(a.sidecar, "utf8")).toBe(readFileSync(b.sidecar, "utf8"));
    expect(readFileSync(a.output, "utf8")).toBe(readFileSync(b.output, "utf8"));
  });

  it("one series per witness family and dimension, decaying tails", () => {
    const dir = stage();
    const { sidecar } = runRender(join(dir, "fig2a.plotspec.json"));
    const byName = new Map<string, Array<[number, number]>>();
    for (const line of readFileSync(sidecar, "utf8").split("\n")) {
      if (line.length === 0 || line.startsWith("#") || line.startsWith("bound ")) continue;
      const [name, x, y] = line.split("\t");
      const pts = byName.get(name) ?? [];
      pts.push([Number(x), Number(y)]);
      byName.set(name, pts);
    }
    expect([...byName.keys()].sort()).toEqual([
      "ew_faithful d=4",
      "ew_faithful d=9",
      "ew_ppt d=4",
      "ew_ppt d=9",
    ]);
    for (const pts of byName.values()) {
      pts.sort((a, b) => a[0] - b[0]);
      expect(pts[pts.length - 1][1]).toBeLessThan(pts[0][1]);
    }
  });

  it("notes the rows dropped from the log axis", () => {
    const dir = stage();
    const { sidecar } = runRender(join(dir, "fig2a.plotspec.json"));
    const note = readFileSync(sidecar, "utf8")
      .split("\n")
      .find((l) => l.startsWith("# skipped_rows = "));
    expect(note).toBeDefined();
    let zeros = 0;
    for (const csvName of readdirSync(FIXTURES).filter((n) => n.endsWith(".csv"))) {
      for (const row of parseSweepCsv(readFileSync(join(FIXTURES, csvName), "utf8"))) {
        if (row.error !== "" || row.nDetected === 0) zeros++;
      }
    }
    expect(note).toBe(`# skipped_rows = ${zeros}`);
  });
});
