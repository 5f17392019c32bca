/**
 * Reader for the capability-sweep CSV schema.
 *
 * The numeric p_hat is kept both parsed and as the verbatim source token:
 * sidecar files must carry the engine's values byte-for-byte, with no
 * reformatting on the way through.
 */

export const COLUMNS = [
  "experiment_id",
  "criterion",
  "d_a",
  "d_b",
  "k",
  "n_samples",
  "n_detected",
  "p_hat",
  "ci_low",
  "ci_high",
  "master_seed",
  "bound_value",
  "wall_time_s",
  "error",
] as const;

export interface SweepRow {
  experimentId: string;
  criterion: string;
  dA: number;
  dB: number;
  k: number;
  nSamples: number;
  nDetected: number;
  pHat: number;
  pHatToken: string;
  ciLow: number;
  ciHigh: number;
  masterSeed: string;
  boundValue: number | null;
  wallTimeS: number;
  error: string;
}

/** Split one CSV record, honoring double-quoted fields. */
function splitRecord(line: string): string[] {
  const fields: string[] = [];
  let cur = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          cur += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      fields.push(cur);
      cur = "";
    } else {
      cur += ch;
    }
  }
  fields.push(cur);
  return fields;
}

export function parseSweepCsv(text: string, source = "<csv>"): SweepRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`${source}: empty CSV`);
  }
  const header = splitRecord(lines[0]);
  if (header.length !== COLUMNS.length || header.some((h, i) => h !== COLUMNS[i])) {
    throw new Error(`${source}: unexpected header ${lines[0]}`);
  }
  return lines.slice(1).map((line, idx) => {
    const f = splitRecord(line);
    if (f.length !== COLUMNS.length) {
      throw new Error(`${source}: record ${idx + 2} has ${f.length} fields`);
    }
    return {
      experimentId: f[0],
      criterion: f[1],
      dA: Number(f[2]),
      dB: Number(f[3]),
      k: Number(f[4]),
      nSamples: Number(f[5]),
      nDetected: Number(f[6]),
      pHat: Number(f[7]),
      pHatToken: f[7],
      ciLow: Number(f[8]),
      ciHigh: Number(f[9]),
      masterSeed: f[10],
      boundValue: f[11] === "" ? null : Number(f[11]),
      wallTimeS: Number(f[12]),
      error: f[13],
    };
  });
}
