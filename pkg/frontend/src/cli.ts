/**
 * Command line entry: render one figure per process.
 *
 *   amofractal-plot <kind> <artifact-dir> [<more-dirs>] --out <file.svg>
 *
 * Exit codes follow the producer's convention: 0 on success, 2 when an input
 * fails schema validation, 1 for usage or missing-file problems.
 */

import { writeFileSync } from "node:fs";

import { FIGURE_KINDS, UsageError, render } from "./figures.js";
import { SchemaMismatchError } from "./schema.js";

const USAGE = [
  "usage: amofractal-plot <kind> <artifact-dir> [<more-dirs>] --out <file.svg>",
  `kinds: ${FIGURE_KINDS.join(", ")}`,
  "staircase takes two directories: the ids artifact run, then the gaps artifact run",
].join("\n");

export function run(argv: string[]): number {
  let kind: string | null = null;
  let out: string | null = null;
  const dirs: string[] = [];
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--help" || a === "-h") {
      console.log(USAGE);
      return 0;
    }
    if (a === "--out") {
      if (i + 1 >= argv.length) {
        console.error(USAGE);
        return 1;
      }
      out = argv[++i];
    } else if (kind === null) {
      kind = a;
    } else {
      dirs.push(a);
    }
  }
  if (kind === null || out === null || dirs.length === 0) {
    console.error(USAGE);
    return 1;
  }
  let svg: string;
  try {
    svg = render(kind, dirs);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(err.message);
      return 1;
    }
    if (err instanceof SchemaMismatchError) {
      console.error(`schema mismatch: ${err.message}`);
      return 2;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      console.error(String(err));
      return 1;
    }
    throw err;
  }
  writeFileSync(out, svg);
  console.log(`wrote ${out} (${Buffer.byteLength(svg)} bytes)`);
  return 0;
}
