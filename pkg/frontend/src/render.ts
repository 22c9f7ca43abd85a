// CLI: render --in FILE [FILE...] --kind ser|rate|rate-compare --out IMG
// Reads stokes4d result CSVs (read-only) and writes one SVG figure.

import * as fs from "fs";
import { readResultTable } from "./csv";
import { FigureKind, buildFigure } from "./figure";
import { renderSvg } from "./svg";

interface Args {
  inputs: string[];
  kind: FigureKind;
  out: string;
}

export function parseArgs(argv: string[]): Args {
  const inputs: string[] = [];
  let kind: string | undefined;
  let out: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--in":
        while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
          inputs.push(argv[++i]);
        }
        break;
      case "--kind":
        kind = argv[++i];
        break;
      case "--out":
        out = argv[++i];
        break;
      default:
        throw new Error(`unknown argument: ${argv[i]}`);
    }
  }
  if (inputs.length === 0) throw new Error("missing --in FILE [FILE...]");
  if (kind !== "ser" && kind !== "rate" && kind !== "rate-compare") {
    throw new Error("missing or invalid --kind (ser | rate | rate-compare)");
  }
  if (!out) throw new Error("missing --out IMG");
  return { inputs, kind, out };
}

export function run(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const tables = args.inputs.map(readResultTable);
    const figure = buildFigure(args.kind, tables);
    fs.writeFileSync(args.out, renderSvg(figure));
    console.log(
      `wrote ${args.out}: ${figure.series.length} series, ` +
        `${figure.yScale}-scaled ${figure.yLabel}`
    );
    return 0;
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
}

if (require.main === module) {
  process.exit(run(process.argv.slice(2)));
}
