// Series assembly: turn result tables into the figure's series data.
// Only series content and axis semantics are contractual; styling is not.

import { ResultTable, constellationLabel, spacingLabel } from "./csv";

export type FigureKind = "ser" | "rate" | "rate-compare";

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

export interface FigureData {
  kind: FigureKind;
  xLabel: string;
  yLabel: string;
  yScale: "log" | "linear";
  series: Series[];
}

export function buildFigure(kind: FigureKind, tables: ResultTable[]): FigureData {
  if (tables.length === 0) {
    throw new Error("no input tables; pass at least one --in file");
  }
  switch (kind) {
    case "ser":
      return buildSer(tables);
    case "rate":
      return buildRate(tables);
    case "rate-compare":
      return buildRateCompare(tables);
  }
}

function requireKind(table: ResultTable, kind: string) {
  if (table.kind !== kind) {
    throw new Error(
      `${table.path}: expected a ${kind} table, found ${table.kind}`
    );
  }
  if (table.rows.length === 0) {
    throw new Error(`${table.path}: table has no rows; rerun the sweep`);
  }
}

function buildSer(tables: ResultTable[]): FigureData {
  // one series per (dimension, detector, mode); zero-SER points cannot sit
  // on a log axis and are dropped from the polyline
  const series: Series[] = [];
  for (const table of tables) {
    requireKind(table, "ser");
    const groups = new Map<string, Series>();
    for (const row of table.rows) {
      const key = `dim${row.dimension} ${row.detector}/${row.mode}` +
        (tables.length > 1 ? ` ${spacingLabel(table)}` : "");
      if (!groups.has(key)) groups.set(key, { label: key, x: [], y: [] });
      const s = groups.get(key)!;
      if ((row.ser as number) > 0) {
        s.x.push(row.snr_db as number);
        s.y.push(row.ser as number);
      }
    }
    series.push(...groups.values());
  }
  series.forEach(sortByX);
  return {
    kind: "ser",
    xLabel: "SNR (dB)",
    yLabel: "symbol error rate",
    yScale: "log",
    series,
  };
}

function buildRate(tables: ResultTable[]): FigureData {
  const series = tables.map((table) => {
    requireKind(table, "rate");
    return {
      label: spacingLabel(table),
      x: table.rows.map((r) => r.snr_db as number),
      y: table.rows.map((r) => r.rate_bits as number),
    };
  });
  series.forEach(sortByX);
  return {
    kind: "rate",
    xLabel: "SNR (dB)",
    yLabel: "achievable rate (bits/channel use)",
    yScale: "linear",
    series,
  };
}

function buildRateCompare(tables: ResultTable[]): FigureData {
  const series = tables.map((table) => {
    requireKind(table, "rate");
    return {
      label: constellationLabel(table),
      x: table.rows.map((r) => r.snr_db as number),
      y: table.rows.map((r) => r.rate_bits as number),
    };
  });
  series.forEach(sortByX);
  return {
    kind: "rate-compare",
    xLabel: "SNR (dB)",
    yLabel: "achievable rate (bits/channel use)",
    yScale: "linear",
    series,
  };
}

function sortByX(s: Series) {
  const order = s.x.map((_, i) => i).sort((a, b) => s.x[a] - s.x[b]);
  s.x = order.map((i) => s.x[i]);
  s.y = order.map((i) => s.y[i]);
}
