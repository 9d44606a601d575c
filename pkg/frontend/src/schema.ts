/**
 * Readers for the published artifact formats: tagged CSV tables, JSON reports,
 * and the per-run manifest.  Everything is validated up front so a figure
 * either renders from well-formed inputs or fails with SchemaMismatchError;
 * there is no partial rendering.
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";

export class SchemaMismatchError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaMismatchError";
  }
}

export interface CsvTable {
  tag: string;
  header: string[];
  rows: number[][];
}

/**
 * Read a tagged CSV table.  Line 0 must be the schema tag line, line 1 the
 * expected header; every cell must parse as a finite number.
 */
export function readCsv(path: string, tag: string, header: string[]): CsvTable {
  const lines = readFileSync(path, "utf8")
    .split("\n")
    .map((l) => (l.endsWith("\r") ? l.slice(0, -1) : l))
    .filter((l) => l.length > 0);
  const want = `# schema ${tag} 1`;
  if (lines[0] !== want) {
    throw new SchemaMismatchError(`${path}: expected tag line "${want}", found "${lines[0] ?? ""}"`);
  }
  const wantHeader = header.join(",");
  if (lines[1] !== wantHeader) {
    throw new SchemaMismatchError(`${path}: expected header "${wantHeader}", found "${lines[1] ?? ""}"`);
  }
  const rows: number[][] = [];
  for (let i = 2; i < lines.length; i++) {
    const cells = (lines[i] as string).split(",");
    if (cells.length !== header.length) {
      throw new SchemaMismatchError(`${path}:${i + 1}: expected ${header.length} cells, found ${cells.length}`);
    }
    const row = cells.map((c) => Number(c));
    for (let j = 0; j < row.length; j++) {
      if (!Number.isFinite(row[j])) {
        throw new SchemaMismatchError(`${path}:${i + 1}: cell "${cells[j]}" is not a finite number`);
      }
    }
    rows.push(row);
  }
  return { tag, header, rows };
}

export interface Manifest {
  schema: string;
  determinism_hash: string;
  artifacts: Record<string, string>;
  plan: Record<string, string>;
  seed: number;
  status: string;
  versions: Record<string, string>;
}

/** Read and validate <dir>/manifest.json. */
export function readManifest(dir: string): Manifest {
  const path = join(dir, "manifest.json");
  const raw = JSON.parse(readFileSync(path, "utf8")) as Partial<Manifest>;
  if (raw.schema !== "run-manifest/1") {
    throw new SchemaMismatchError(`${path}: expected schema "run-manifest/1", found "${raw.schema}"`);
  }
  if (typeof raw.determinism_hash !== "string" || !/^[0-9a-f]{64}$/.test(raw.determinism_hash)) {
    throw new SchemaMismatchError(`${path}: determinism_hash is not a sha256 hex digest`);
  }
  return raw as Manifest;
}

/** Read a JSON artifact whose top-level "schema" field must match. */
export function readJsonArtifact<T extends { schema: string }>(path: string, schema: string): T {
  const raw = JSON.parse(readFileSync(path, "utf8")) as { schema?: unknown };
  if (raw.schema !== schema) {
    throw new SchemaMismatchError(`${path}: expected schema "${schema}", found "${raw.schema}"`);
  }
  return raw as T;
}

// frequency specification as serialized inside tree.json
export interface AlphaSpecJson {
  kind: "quadratic" | "cf" | "decimal";
  precision_bits: number;
  p?: number;
  q?: number;
  d?: number;
  prefix?: number[];
  tail?: number[] | null;
  digits?: string;
}

export interface TreeNodeJson {
  n: number | null;
  t: number;
  scale: number | null;
  expanded: boolean;
  children: TreeNodeJson[];
  annulus?: { n: number; l: number; delta: string; log10_outer: number } | null;
}

export interface CantorTreeJson {
  schema: string;
  alpha: AlphaSpecJson;
  delta: string;
  depth: number;
  schedule: string[];
  root: TreeNodeJson;
}

export interface HolderReportJson {
  schema: string;
  c_low: number;
  c_high: number;
  energies: number;
  eps_count: number;
  violations: number;
}

/**
 * Numeric value of a serialized frequency.  Double precision is plenty here:
 * the value only positions ticks on a ring.
 */
export function alphaValue(spec: AlphaSpecJson): number {
  if (spec.kind === "quadratic") {
    if (spec.p === undefined || spec.q === undefined || spec.d === undefined) {
      throw new SchemaMismatchError("quadratic frequency spec is missing p, q, or d");
    }
    return (spec.p + Math.sqrt(spec.d)) / spec.q;
  }
  if (spec.kind === "cf") {
    const terms = [...(spec.prefix ?? [])];
    if (spec.tail && spec.tail.length > 0) {
      while (terms.length < 48) terms.push(...spec.tail);
    }
    if (terms.length === 0) {
      throw new SchemaMismatchError("cf frequency spec has no partial quotients");
    }
    // convergents of [0; a1, a2, ...]
    let hPrev = 1;
    let h = 0;
    let kPrev = 0;
    let k = 1;
    for (const a of terms) {
      const hNext = a * h + hPrev;
      const kNext = a * k + kPrev;
      hPrev = h;
      kPrev = k;
      h = hNext;
      k = kNext;
    }
    return h / k;
  }
  if (spec.kind === "decimal") {
    const v = Number(spec.digits);
    if (!Number.isFinite(v)) {
      throw new SchemaMismatchError(`decimal frequency spec has bad digits "${spec.digits}"`);
    }
    return v;
  }
  throw new SchemaMismatchError(`unknown frequency kind "${(spec as { kind: string }).kind}"`);
}

/** Short human-readable form of a frequency spec, for subtitles. */
export function alphaLabel(spec: AlphaSpecJson): string {
  if (spec.kind === "quadratic") return `alpha=(${spec.p}+sqrt(${spec.d}))/${spec.q}`;
  if (spec.kind === "cf") {
    const head = (spec.prefix ?? []).slice(0, 6).join(",");
    const tail = spec.tail && spec.tail.length > 0 ? `;${spec.tail.join(",")}` : "";
    return `alpha=[0;${head}${tail}]`;
  }
  return `alpha=${(spec.digits ?? "").slice(0, 10)}...`;
}
