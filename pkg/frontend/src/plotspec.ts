/** Plot description files: which CSVs to read and how to slice them. */

export type XField = "k" | "d";

export interface BoundOverlay {
  /** legend label, also used as the series name in the sidecar */
  label: string;
  /** witness factor; overlay value is 2 exp(-(sqrt(1+alpha)-1)^2 k) */
  alpha: number;
}

export interface PlotSpec {
  inputs: string[];
  x: XField;
  /** row fields that name a series, e.g. ["criterion", "d"] */
  seriesBy: string[];
  logY: boolean;
  overlays: BoundOverlay[];
  output: string;
  title?: string;
}

const SERIES_FIELDS = new Set(["criterion", "d", "k", "experiment_id"]);

export function parsePlotSpec(text: string, source = "<spec>"): PlotSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new Error(`${source}: not valid JSON (${(err as Error).message})`);
  }
  const obj = raw as Record<string, unknown>;
  if (!Array.isArray(obj.inputs) || obj.inputs.length === 0) {
    throw new Error(`${source}: "inputs" must be a nonempty array of CSV paths`);
  }
  if (obj.x !== "k" && obj.x !== "d") {
    throw new Error(`${source}: "x" must be "k" or "d"`);
  }
  if (!Array.isArray(obj.seriesBy) || obj.seriesBy.length === 0) {
    throw new Error(`${source}: "seriesBy" must be a nonempty array`);
  }
  for (const f of obj.seriesBy) {
    if (typeof f !== "string" || !SERIES_FIELDS.has(f)) {
      throw new Error(`${source}: unknown series field ${JSON.stringify(f)}`);
    }
  }
  const overlays: BoundOverlay[] = [];
  if (obj.overlays !== undefined) {
    if (!Array.isArray(obj.overlays)) {
      throw new Error(`${source}: "overlays" must be an array`);
    }
    for (const o of obj.overlays as Record<string, unknown>[]) {
      if (typeof o.label !== "string" || typeof o.alpha !== "number" || o.alpha < 1) {
        throw new Error(`${source}: overlay needs a label and alpha >= 1`);
      }
      overlays.push({ label: o.label, alpha: o.alpha });
    }
    if (overlays.length > 0 && obj.x !== "k") {
      throw new Error(`${source}: bound overlays require x = "k"`);
    }
  }
  if (typeof obj.output !== "string" || obj.output.length === 0) {
    throw new Error(`${source}: "output" must be the image path`);
  }
  return {
    inputs: obj.inputs.map(String),
    x: obj.x,
    seriesBy: obj.seriesBy.map(String),
    logY: obj.logY === undefined ? true : Boolean(obj.logY),
    overlays,
    output: obj.output,
    title: typeof obj.title === "string" ? obj.title : undefined,
  };
}
