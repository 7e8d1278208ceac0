#!/usr/bin/env node
import { parseArgs } from "node:util";
import { runPlot } from "./plot.js";

const USAGE = `usage: plot --csv <results.csv> [--group-by n|k] [--out <dir>]
            [--filter key=value,key=value] [--log-x]

Reads a benchmark results CSV and writes one PNG per
(generator, policy, feedback) combination, plus aggregate.csv.`;

export function main(argv: string[]): number {
  let values: {
    csv?: string;
    "group-by"?: string;
    out?: string;
    filter?: string;
    "log-x"?: boolean;
    help?: boolean;
  };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        csv: { type: "string" },
        "group-by": { type: "string", default: "n" },
        out: { type: "string", default: "figs" },
        filter: { type: "string" },
        "log-x": { type: "boolean", default: false },
        help: { type: "boolean", default: false },
      },
    }));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    return 2;
  }

  if (values.help) {
    console.log(USAGE);
    return 0;
  }
  if (!values.csv) {
    console.error("missing required --csv");
    console.error(USAGE);
    return 2;
  }
  const groupBy = values["group-by"];
  if (groupBy !== "n" && groupBy !== "k") {
    console.error(`--group-by must be "n" or "k", got "${groupBy}"`);
    return 2;
  }

  try {
    const result = runPlot({
      csvPath: values.csv,
      outDir: values.out ?? "figs",
      groupBy,
      filter: values.filter,
      logX: values["log-x"],
    });
    const skippedNote = result.skipped > 0 ? ` (skipped ${result.skipped} error rows)` : "";
    console.log(
      `plotted ${result.rowCount} rows${skippedNote} into ${result.figures.length} ` +
        `figure(s): ${result.figures.join(", ")}`,
    );
    console.log(`wrote ${result.aggregatePath}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
