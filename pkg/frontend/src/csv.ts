// Parsing of stokes4d result files: a CSV with a fixed per-kind header plus
// an optional `.meta` sidecar of `key = value` lines.

import * as fs from "fs";
import * as path from "path";

export type Row = Record<string, number | string>;

export interface ResultTable {
  kind: string;
  columns: string[];
  rows: Row[];
  metadata: Record<string, string>;
  path: string;
}

const SCHEMAS: Record<string, Record<string, "int" | "float" | "str">> = {
  ser: {
    snr_db: "float",
    dimension: "int",
    detector: "str",
    mode: "str",
    errors: "int",
    trials: "int",
    ser: "float",
    ci_low: "float",
    ci_high: "float",
  },
  rate: {
    snr_db: "float",
    rate_bits: "float",
    stderr: "float",
    samples: "int",
  },
  gap: {
    dimension: "int",
    target_ser: "float",
    snr_db_base: "float",
    snr_db_candidate: "float",
    gap_db: "float",
  },
  table1: {
    n_r: "int",
    n_p: "int",
    delta_sq_bl: "float",
  },
};

function kindForHeader(columns: string[]): string | undefined {
  return Object.keys(SCHEMAS).find((kind) => {
    const names = Object.keys(SCHEMAS[kind]);
    return (
      names.length === columns.length && names.every((n, i) => n === columns[i])
    );
  });
}

export function readResultTable(file: string): ResultTable {
  const text = fs.readFileSync(file, "utf-8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new Error(`${file}: empty results file (no header row)`);
  }
  const columns = lines[0].split(",");
  const kind = kindForHeader(columns);
  if (kind === undefined) {
    throw new Error(
      `${file}: header [${columns.join(", ")}] matches no known result schema`
    );
  }
  const schema = SCHEMAS[kind];
  const rows: Row[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `${file}:${i + 1}: expected ${columns.length} cells, found ${cells.length}`
      );
    }
    const row: Row = {};
    columns.forEach((name, j) => {
      const want = schema[name];
      if (want === "str") {
        row[name] = cells[j];
      } else {
        const value = Number(cells[j]);
        if (!Number.isFinite(value)) {
          throw new Error(`${file}:${i + 1}: ${name} is not a number: ${cells[j]}`);
        }
        row[name] = value;
      }
    });
    rows.push(row);
  }
  return { kind, columns, rows, metadata: readMetadata(file), path: file };
}

function readMetadata(file: string): Record<string, string> {
  const metaPath = file.replace(/\.[^.]+$/, ".meta");
  const metadata: Record<string, string> = {};
  if (!fs.existsSync(metaPath)) return metadata;
  for (const line of fs.readFileSync(metaPath, "utf-8").split("\n")) {
    const idx = line.indexOf(" = ");
    if (idx > 0) metadata[line.slice(0, idx)] = line.slice(idx + 3);
  }
  return metadata;
}

export function constellationLabel(table: ResultTable): string {
  const nR = table.metadata["config.constellation.n_r"];
  const nP = table.metadata["config.constellation.n_p"];
  if (nR && nP) return `(${nR},${nP})`;
  return path.basename(table.path).replace(/\.csv$/, "");
}

export function spacingLabel(table: ResultTable): string {
  const d2 = table.metadata["config.constellation.delta_sq"];
  return d2 ? `d2=${d2}` : path.basename(table.path).replace(/\.csv$/, "");
}
