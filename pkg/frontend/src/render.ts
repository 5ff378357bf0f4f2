/**
 * Figure renderer for the detection toolkit's exported artifacts.
 *
 * Usage:
 *   render --kind md_snr|iou_snr|md_size|iou_size|thresholds|flops \
 *          --in results.csv --out figure.svg [--facets 16,64,256]
 *
 * Exit codes: 0 ok, 2 usage error, 1 data error (e.g. missing column).
 */

import { readFileSync, writeFileSync } from "fs";
import { parseFlopsCsv, parseSweepCsv, parseThresholdsJson } from "./csv.js";
import {
  KINDS,
  Kind,
  renderFlopsFigure,
  renderSweepFigure,
  renderThresholdsFigure,
} from "./figures.js";

function usage(message: string): never {
  console.error(message);
  console.error(
    "usage: render --kind <" + KINDS.join("|") + "> --in <file> --out <file> [--facets a,b,c]"
  );
  process.exit(2);
}

function parseArgs(argv: string[]) {
  const args: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    if (!flag.startsWith("--") || i + 1 >= argv.length) {
      usage(`bad argument: ${flag}`);
    }
    args[flag.slice(2)] = argv[i + 1];
  }
  if (!args.kind || !args.in || !args.out) {
    usage("need --kind, --in and --out");
  }
  if (!KINDS.includes(args.kind as Kind)) {
    usage(`unknown kind: ${args.kind}`);
  }
  return args;
}

export function render(kind: Kind, inputText: string, facets?: number[]): string {
  if (kind === "thresholds") {
    return renderThresholdsFigure(parseThresholdsJson(inputText));
  }
  if (kind === "flops") {
    return renderFlopsFigure(parseFlopsCsv(inputText));
  }
  return renderSweepFigure(kind, parseSweepCsv(inputText), facets);
}

function main() {
  const args = parseArgs(process.argv.slice(2));
  const facets = args.facets
    ? args.facets.split(",").map((v) => Number(v))
    : undefined;
  let text: string;
  try {
    text = readFileSync(args.in, "utf-8");
  } catch (err) {
    console.error(`cannot read ${args.in}: ${err}`);
    process.exit(1);
  }
  try {
    const svg = render(args.kind as Kind, text, facets);
    writeFileSync(args.out, svg, "utf-8");
    console.error(`wrote ${args.out}`);
  } catch (err) {
    console.error(`render failed: ${(err as Error).message}`);
    process.exit(1);
  }
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("render.js") || entry.endsWith("render.ts")) {
  main();
}
