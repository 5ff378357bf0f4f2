/**
 * Parsers for the toolkit's exported artifacts: sweep CSV, flops CSV,
 * and the thresholds JSON. Blank CSV fields become nulls.
 */

import Papa from "papaparse";

export interface SweepRow {
  detector: string;
  dims: number;
  n: number;
  signal_size: number | null;
  snr_db: number | null;
  trials: number;
  md_rate: number | null;
  fa_rate: number | null;
  iou_mean: number | null;
  iou_error_rate: number | null;
  mean_score: number;
  seed: number;
}

export interface FlopsRow {
  shape: string;
  algorithm: string;
  flops: number;
}

export interface ThresholdEntry {
  ell: number;
  u: number;
  t: number;
}

export interface ThresholdTable {
  pfa: number;
  n_total: number;
  entries: ThresholdEntry[];
}

const SWEEP_COLUMNS = [
  "detector", "dims", "n", "signal_size", "snr_db", "trials",
  "md_rate", "fa_rate", "iou_mean", "iou_error_rate", "mean_score", "seed",
];

const FLOPS_COLUMNS = ["shape", "algorithm", "flops"];

function parseCsv(text: string, required: string[]): Record<string, string>[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`CSV parse error: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!fields.includes(col)) {
      throw new Error(`missing column: ${col}`);
    }
  }
  return parsed.data;
}

function num(value: string, column: string, row: number): number {
  const v = Number(value);
  if (value === "" || Number.isNaN(v)) {
    throw new Error(`row ${row}: column ${column} is not a number: "${value}"`);
  }
  return v;
}

function numOrNull(value: string, column: string, row: number): number | null {
  if (value === "" || value === undefined) return null;
  return num(value, column, row);
}

export function parseSweepCsv(text: string): SweepRow[] {
  return parseCsv(text, SWEEP_COLUMNS).map((raw, i) => ({
    detector: raw.detector,
    dims: num(raw.dims, "dims", i),
    n: num(raw.n, "n", i),
    signal_size: numOrNull(raw.signal_size, "signal_size", i),
    snr_db: numOrNull(raw.snr_db, "snr_db", i),
    trials: num(raw.trials, "trials", i),
    md_rate: numOrNull(raw.md_rate, "md_rate", i),
    fa_rate: numOrNull(raw.fa_rate, "fa_rate", i),
    iou_mean: numOrNull(raw.iou_mean, "iou_mean", i),
    iou_error_rate: numOrNull(raw.iou_error_rate, "iou_error_rate", i),
    mean_score: num(raw.mean_score, "mean_score", i),
    seed: num(raw.seed, "seed", i),
  }));
}

export function parseFlopsCsv(text: string): FlopsRow[] {
  return parseCsv(text, FLOPS_COLUMNS).map((raw, i) => ({
    shape: raw.shape,
    algorithm: raw.algorithm,
    flops: num(raw.flops, "flops", i),
  }));
}

export function parseThresholdsJson(text: string): ThresholdTable {
  const data = JSON.parse(text);
  for (const key of ["pfa", "n_total", "entries"]) {
    if (!(key in data)) throw new Error(`missing column: ${key}`);
  }
  return data as ThresholdTable;
}
