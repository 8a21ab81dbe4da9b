/**
 * Loaders for the solver artifacts: the wide series.csv (first column t,
 * one column per recorded norm) and the JSON run report carrying fitted
 * exponents, expected rates and the fit window.
 */
import { readFileSync } from "node:fs";
import Papa from "papaparse";
import { z } from "zod";

export interface SeriesTable {
  times: number[];
  columns: Map<string, number[]>;
}

export function loadSeriesCsv(path: string): SeriesTable {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new Error(`failed to parse ${path}: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length < 2) {
    throw new Error(`${path} has no data rows`);
  }
  const header = rows[0];
  if (header[0] !== "t") {
    throw new Error(`${path}: first column must be 't', got '${header[0]}'`);
  }
  const times: number[] = [];
  const columns = new Map<string, number[]>(header.slice(1).map((name) => [name, []]));
  for (const row of rows.slice(1)) {
    times.push(Number(row[0]));
    header.slice(1).forEach((name, j) => {
      columns.get(name)!.push(Number(row[j + 1]));
    });
  }
  return { times, columns };
}

const fitSchema = z.object({
  exponent: z.number(),
  intercept: z.number(),
  r_squared: z.number(),
  window: z.tuple([z.number(), z.number()]),
  kind: z.string(),
  n_samples: z.number(),
  reliable: z.boolean(),
});

const rowSchema = z.object({
  name: z.string(),
  expected: z.number(),
  fitted: z.number(),
  tolerance: z.number(),
  mode: z.string(),
  passed: z.boolean(),
});

const reportSchema = z.object({
  scenario: z.string(),
  expected_rates: z.record(z.string(), z.number()),
  fits: z.record(z.string(), fitSchema),
  rows: z.array(rowSchema.loose()),
  all_passed: z.boolean(),
});

export type RunReport = z.infer<typeof reportSchema>;
export type DecayFit = z.infer<typeof fitSchema>;

export function loadReport(path: string): RunReport {
  const raw = JSON.parse(readFileSync(path, "utf8"));
  const result = reportSchema.loose().safeParse(raw);
  if (!result.success) {
    throw new Error(`invalid report ${path}: ${result.error.issues[0]?.message}`);
  }
  return result.data;
}

/** Fit window from the first fitted quantity (all fits share one window). */
export function fitWindow(report: RunReport): [number, number] | undefined {
  for (const fit of Object.values(report.fits)) {
    return fit.window;
  }
  return undefined;
}

/**
 * Expected (negative) reference slope for a quantity, read verbatim from the
 * report: prefer the gate row, fall back to the expected-rate table.
 */
export function expectedSlope(report: RunReport, quantity: string): number | undefined {
  const row = report.rows.find((r) => r.name === quantity);
  if (row) return row.expected;
  const rate = report.expected_rates[quantity];
  return rate === undefined ? undefined : -rate;
}
