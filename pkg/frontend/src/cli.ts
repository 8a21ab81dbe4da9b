#!/usr/bin/env node
/** Command line entry: render decay figures from solver artifacts. */
import { writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { loadReport, loadSeriesCsv, type RunReport } from "./data.js";
import { renderDecayFigure } from "./render.js";

function defaultQuantities(report: RunReport | undefined, available: string[]): string[] {
  if (report) {
    const gated = report.rows.map((r) => r.name).filter((name) => available.includes(name));
    if (gated.length > 0) return gated;
  }
  return available.filter((name) => name.endsWith("_L2")).slice(0, 4);
}

export async function run(argv: string[]): Promise<number> {
  const parser = yargs(argv)
    .scriptName("hpchem-plot")
    .command(
      "plot <csv>",
      "render a log-log decay figure from series.csv",
      (y) =>
        y
          .positional("csv", { type: "string", demandOption: true })
          .option("report", { type: "string", describe: "report.json with fitted exponents" })
          .option("out", { type: "string", demandOption: true, describe: "output SVG path" })
          .option("quantities", {
            type: "string",
            describe: "comma-separated column names (default: gated quantities)",
          })
          .option("title", { type: "string" }),
    )
    .demandCommand(1)
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      throw err ?? new Error(msg);
    });

  const args = await parser.parse();
  const table = loadSeriesCsv(args.csv as string);
  const report = args.report ? loadReport(args.report as string) : undefined;
  const quantities = args.quantities
    ? (args.quantities as string).split(",").map((s) => s.trim()).filter((s) => s.length > 0)
    : defaultQuantities(report, [...table.columns.keys()]);

  const result = renderDecayFigure(table, report, quantities, {
    title: (args.title as string | undefined) ?? report?.scenario,
  });
  for (const warning of result.warnings) {
    console.warn(`warning: ${warning}`);
  }
  writeFileSync(args.out as string, result.svg, "utf8");
  console.log(`wrote ${args.out} (${quantities.join(", ")})`);
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  run(hideBin(process.argv))
    .then((code) => {
      process.exitCode = code;
    })
    .catch((err) => {
      console.error(`error: ${err.message}`);
      process.exitCode = 1;
    });
}
