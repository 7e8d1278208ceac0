import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { aggregate, aggregateCsv } from "./aggregate.js";
import { renderFigure } from "./chart.js";
import { parseFilter, parseResults } from "./csv.js";
import { buildFigures, figureFileName, type GroupBy } from "./figure.js";
import { encodePng } from "./png.js";

export interface PlotOptions {
  csvPath: string;
  outDir: string;
  groupBy: GroupBy;
  filter?: string;
  logX?: boolean;
}

export interface PlotResult {
  figures: string[];
  aggregatePath: string;
  skipped: number;
  rowCount: number;
}

/** Read a results CSV, write one PNG per figure plus aggregate.csv. */
export function runPlot(opts: PlotOptions): PlotResult {
  const text = readFileSync(opts.csvPath, "utf8");
  const { rows: parsed, skipped } = parseResults(text);
  const rows = opts.filter ? parsed.filter(parseFilter(opts.filter)) : parsed;
  if (rows.length === 0) {
    throw new Error("no plottable rows (after skipping errors and filters)");
  }

  mkdirSync(opts.outDir, { recursive: true });

  const figures: string[] = [];
  for (const fig of buildFigures(rows, opts.groupBy)) {
    const name = figureFileName(fig);
    const png = encodePng(renderFigure(fig, { logX: opts.logX }));
    writeFileSync(join(opts.outDir, name), png);
    figures.push(name);
  }

  const aggregatePath = join(opts.outDir, "aggregate.csv");
  writeFileSync(aggregatePath, aggregateCsv(aggregate(rows)));

  return { figures, aggregatePath, skipped, rowCount: rows.length };
}
