import Papa from "papaparse";

/** One usable benchmark row; error rows are dropped during parsing. */
export interface ResultRow {
  generator: string;
  policy: string;
  feedback: string;
  n: number;
  k: number;
  M: number;
  seed: number;
  gap: number;
}

export const REQUIRED_COLUMNS = [
  "generator",
  "policy",
  "feedback",
  "n",
  "k",
  "M",
  "seed",
  "surrogate_gap",
  "error",
] as const;

export class MissingColumnError extends Error {
  constructor(public readonly column: string) {
    super(`results CSV is missing required column "${column}"`);
    this.name = "MissingColumnError";
  }
}

export interface ParsedResults {
  rows: ResultRow[];
  /** rows dropped because they carry an error or no gap value */
  skipped: number;
}

export function parseResults(text: string): ParsedResults {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  const fields = parsed.meta.fields ?? [];
  for (const col of REQUIRED_COLUMNS) {
    if (!fields.includes(col)) throw new MissingColumnError(col);
  }
  const rows: ResultRow[] = [];
  let skipped = 0;
  for (const rec of parsed.data) {
    if (rec.error !== "" || rec.surrogate_gap === "") {
      skipped += 1;
      continue;
    }
    rows.push({
      generator: rec.generator,
      policy: rec.policy,
      feedback: rec.feedback,
      n: Number(rec.n),
      k: Number(rec.k),
      M: Number(rec.M),
      seed: Number(rec.seed),
      gap: Number(rec.surrogate_gap),
    });
  }
  return { rows, skipped };
}

/** Comma-separated key=value terms, all of which must match. */
export function parseFilter(expr: string): (row: ResultRow) => boolean {
  const terms = expr
    .split(",")
    .map((t) => t.trim())
    .filter((t) => t.length > 0)
    .map((t) => {
      const eq = t.indexOf("=");
      if (eq < 1) throw new Error(`bad filter term "${t}"; expected key=value`);
      return [t.slice(0, eq), t.slice(eq + 1)] as const;
    });
  const keys = new Set<string>(["generator", "policy", "feedback", "n", "k", "M", "seed"]);
  for (const [key] of terms) {
    if (!keys.has(key)) throw new Error(`unknown filter key "${key}"`);
  }
  return (row) =>
    terms.every(([key, value]) => String(row[key as keyof ResultRow]) === value);
}
