/**
 * The five figure kinds.  Each renderer takes artifact directories produced by
 * the amofractal CLI, validates the files it consumes, and returns a complete
 * SVG document as a string.  Rendering is pure: no clock, no RNG, no
 * environment lookups, so identical artifacts give byte-identical figures.
 */

import { join } from "node:path";

import {
  CantorTreeJson,
  HolderReportJson,
  SchemaMismatchError,
  TreeNodeJson,
  alphaLabel,
  alphaValue,
  readCsv,
  readJsonArtifact,
  readManifest,
} from "./schema.js";
import { axisX, axisY, el, fmt, intTicks, linearScale, svgDoc, textEl, titleBlock } from "./svg.js";

export const FIGURE_KINDS = ["butterfly", "staircase", "tail", "cantor", "holder"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export class UsageError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "UsageError";
  }
}

const BAND_COLOR = "#26247a";
const SERIES_COLOR = "#1f6fb2";
const ACCENT_COLOR = "#b22222";
const GUIDE_LOW_COLOR = "#2e8b57";
const LEVEL_COLORS = ["#b22222", "#1f6fb2", "#2e8b57", "#8b6914", "#6a3db2"];

function fracPart(v: number): number {
  return ((v % 1) + 1) % 1;
}

/**
 * Band diagram over rational flux: one horizontal segment per spectral band,
 * stacked by p/q.  Stroke width shrinks with q so coarse fluxes dominate
 * visually, the way the classical picture is usually drawn.
 */
export function renderButterfly(dir: string): string {
  const man = readManifest(dir);
  const table = readCsv(join(dir, "butterfly.csv"), "amofractal.butterfly", ["p", "q", "E_lo", "E_hi"]);
  let emax = 0;
  for (const [, , lo, hi] of table.rows) emax = Math.max(emax, Math.abs(lo), Math.abs(hi));
  if (emax === 0) throw new SchemaMismatchError(`${dir}: band table is empty`);

  const W = 900;
  const H = 640;
  const x = linearScale(-1.04 * emax, 1.04 * emax, 70, W - 40);
  const y = linearScale(0, 1, H - 50, 56);
  const bands: string[] = [];
  for (const [p, q, lo, hi] of table.rows) {
    const yy = y.map(p / q);
    const x1 = x.map(lo);
    // zero-width bands still get a visible dot of a segment
    const x2 = Math.max(x.map(hi), x1 + 0.35);
    bands.push(
      el("line", { x1, y1: yy, x2, y2: yy, stroke: BAND_COLOR, "stroke-width": Math.max(0.4, 7.0 / q) }),
    );
  }
  const body = [
    titleBlock(70, "spectral bands by flux", `lambda=${man.plan["lambda"]}, q <= ${man.plan["qmax"]}, ${table.rows.length} bands`),
    bands.join("\n"),
    axisX(x, H - 50, intTicks(-emax, emax), fmt),
    axisY(y, 70, [0, 0.25, 0.5, 0.75, 1], fmt),
    textEl(W - 40, H - 14, "energy", { "text-anchor": "end" }),
    textEl(70, 52, "flux p/q"),
  ];
  return svgDoc(W, H, [`source-manifest ${man.determinism_hash}`], body);
}

/**
 * Integrated density of states as a staircase, with each labeled plateau
 * annotated by the integer k that realizes its height as a frequency multiple
 * mod 1.  Takes the ids artifact directory and the gaps artifact directory;
 * the two runs must describe the same coupling and flux.
 */
export function renderStaircase(idsDir: string, gapsDir: string): string {
  const mi = readManifest(idsDir);
  const mg = readManifest(gapsDir);
  for (const key of ["lambda", "pq"]) {
    if (mi.plan[key] !== mg.plan[key]) {
      throw new SchemaMismatchError(
        `staircase inputs disagree on ${key}: "${mi.plan[key]}" vs "${mg.plan[key]}"`,
      );
    }
  }
  const ids = readCsv(join(idsDir, "ids.csv"), "amofractal.ids", ["E", "N"]);
  const gaps = readCsv(join(gapsDir, "gaps.csv"), "amofractal.gaps", ["E_lo", "E_hi", "N", "j", "k", "tie"]);
  if (ids.rows.length < 2) throw new SchemaMismatchError(`${idsDir}: staircase needs at least two breakpoints`);
  const rows = [...ids.rows].sort((a, b) => a[0] - b[0]);

  const E0 = rows[0][0];
  const E1 = rows[rows.length - 1][0];
  const pad = 0.06 * (E1 - E0);
  const W = 900;
  const H = 600;
  const x = linearScale(E0 - pad, E1 + pad, 70, W - 40);
  const y = linearScale(0, 1, H - 50, 56);

  const pts = [[E0 - pad, 0], ...rows, [E1 + pad, 1]];
  const d = pts.map(([e, n], i) => `${i === 0 ? "M" : "L"} ${fmt(x.map(e))} ${fmt(y.map(n))}`).join(" ");
  const marks: string[] = [];
  for (const [glo, ghi, N, , k] of gaps.rows) {
    const yy = y.map(N);
    marks.push(
      el("line", {
        x1: x.map(glo),
        y1: yy - 7,
        x2: x.map(ghi),
        y2: yy - 7,
        stroke: ACCENT_COLOR,
        "stroke-width": 1,
        "stroke-dasharray": "3 2",
      }),
    );
    marks.push(
      textEl(x.map((glo + ghi) / 2), yy - 11, `k=${k >= 0 ? "+" : ""}${k}`, {
        "text-anchor": "middle",
        fill: ACCENT_COLOR,
        class: "gap-label",
      }),
    );
  }
  const body = [
    titleBlock(
      70,
      "integrated density of states",
      `lambda=${mi.plan["lambda"]}, flux=${mi.plan["pq"]}, ${gaps.rows.length} labeled gaps`,
    ),
    el("path", { d, fill: "none", stroke: SERIES_COLOR, "stroke-width": 1.6 }),
    marks.join("\n"),
    axisX(x, H - 50, intTicks(E0 - pad, E1 + pad), fmt),
    axisY(y, 70, [0, 0.2, 0.4, 0.6, 0.8, 1], fmt),
    textEl(W - 40, H - 14, "energy", { "text-anchor": "end" }),
    textEl(70, 52, "N(E)"),
  ];
  return svgDoc(W, H, [`source-manifest ${mi.determinism_hash}`, `source-manifest ${mg.determinism_hash}`], body);
}

/**
 * Tail of the resonance series against the cutoff, log-log, with the closed
 * form prediction dashed.  The empirical slope is printed on the figure; for a
 * convergent series it should sit near -(s-1) per decade.
 */
export function renderTail(dir: string): string {
  const man = readManifest(dir);
  const table = readCsv(join(dir, "tail.csv"), "amofractal.tail", ["K", "tail_lo", "tail_hi", "prediction"]);
  if (table.rows.length < 2) throw new SchemaMismatchError(`${dir}: tail sweep needs at least two cutoffs`);
  const rows = [...table.rows].sort((a, b) => a[0] - b[0]);
  for (const [K, , hi, pred] of rows) {
    if (K <= 0 || hi <= 0 || pred <= 0) {
      throw new SchemaMismatchError(`${dir}: tail rows must be positive to plot on log axes`);
    }
  }
  const lx = rows.map((r) => Math.log10(r[0]));
  const ly = rows.map((r) => Math.log10(r[2]));
  const lp = rows.map((r) => Math.log10(r[3]));

  const W = 760;
  const H = 560;
  const x = linearScale(lx[0] - 0.25, lx[lx.length - 1] + 0.25, 80, W - 40);
  const yLo = Math.min(...ly, ...lp) - 0.3;
  const yHi = Math.max(...ly, ...lp) + 0.3;
  const y = linearScale(yLo, yHi, H - 50, 56);

  const predPath = lp.map((v, i) => `${i === 0 ? "M" : "L"} ${fmt(x.map(lx[i]))} ${fmt(y.map(v))}`).join(" ");
  const seriesPath = ly.map((v, i) => `${i === 0 ? "M" : "L"} ${fmt(x.map(lx[i]))} ${fmt(y.map(v))}`).join(" ");
  const dots = rows.map((_, i) =>
    el("circle", { cx: x.map(lx[i]), cy: y.map(ly[i]), r: 3.2, fill: SERIES_COLOR, class: "pt" }),
  );
  const slope = (ly[ly.length - 1] - ly[0]) / (lx[lx.length - 1] - lx[0]);
  const body = [
    titleBlock(80, "resonance series tail vs cutoff", `s=${man.plan["s"]}, eta=${man.plan["eta"]}, prediction dashed`),
    el("path", { d: predPath, fill: "none", stroke: ACCENT_COLOR, "stroke-width": 1.2, "stroke-dasharray": "5 3" }),
    el("path", { d: seriesPath, fill: "none", stroke: SERIES_COLOR, "stroke-width": 1 }),
    dots.join("\n"),
    textEl(W - 44, 70, `empirical slope ${fmt(slope)}`, { "text-anchor": "end", class: "slope-note" }),
    axisX(x, H - 50, intTicks(x.d0, x.d1), (v) => `1e${v}`),
    axisY(y, 80, intTicks(yLo, yHi), (v) => `1e${v}`),
    textEl(W - 40, H - 14, "cutoff K", { "text-anchor": "end" }),
    textEl(80, 52, "tail"),
  ];
  return svgDoc(W, H, [`source-manifest ${man.determinism_hash}`], body);
}

function collectLevels(root: TreeNodeJson): Map<number, { n: number; log10r: number | null }[]> {
  const byLevel = new Map<number, { n: number; log10r: number | null }[]>();
  const walk = (node: TreeNodeJson) => {
    for (const child of node.children) {
      if (child.n === null) continue;
      const entry = { n: child.n, log10r: child.annulus ? child.annulus.log10_outer : null };
      const bucket = byLevel.get(child.t);
      if (bucket) bucket.push(entry);
      else byLevel.set(child.t, [entry]);
      walk(child);
    }
  };
  walk(root);
  return byLevel;
}

/**
 * The nested exclusion system as concentric rings, one per construction
 * level, with a tick at angle 2*pi*{n*alpha} for every node of denominator
 * index n.  Outer-radius ranges per level go in the legend; actual radii are
 * far too small to draw to scale, which is the point of the construction.
 */
export function renderCantor(dir: string): string {
  const man = readManifest(dir);
  const tree = readJsonArtifact<CantorTreeJson>(join(dir, "tree.json"), "cantor-tree/1");
  const alpha = alphaValue(tree.alpha);
  const byLevel = collectLevels(tree.root);
  if (byLevel.size === 0) throw new SchemaMismatchError(`${dir}: tree has no level-1 nodes to draw`);
  const levels = [...byLevel.keys()].sort((a, b) => a - b);

  const W = 880;
  const H = 640;
  const cx = 310;
  const cy = 348;
  const rMax = 240;
  const rings: string[] = [];
  const legend: string[] = [];
  levels.forEach((t, i) => {
    const r = rMax * Math.pow(0.72, i);
    const color = LEVEL_COLORS[(t - 1) % LEVEL_COLORS.length];
    const nodes = byLevel.get(t)!;
    rings.push(el("circle", { cx, cy, r, fill: "none", stroke: "#cccccc", "stroke-width": 1 }));
    for (const { n } of nodes) {
      const th = 2 * Math.PI * fracPart(n * alpha);
      const c = Math.cos(th);
      const s = Math.sin(th);
      rings.push(
        el("line", {
          x1: cx + (r - 6) * c,
          y1: cy - (r - 6) * s,
          x2: cx + (r + 6) * c,
          y2: cy - (r + 6) * s,
          stroke: color,
          "stroke-width": 1.2,
          class: `tick-${t}`,
        }),
      );
    }
    const lrs = nodes.map((e) => e.log10r).filter((v): v is number => v !== null);
    const range =
      lrs.length > 0 ? `log10 r in [${fmt(Math.min(...lrs))}, ${fmt(Math.max(...lrs))}]` : "no radii recorded";
    const ly = 100 + 22 * i;
    legend.push(el("line", { x1: 596, y1: ly - 4, x2: 616, y2: ly - 4, stroke: color, "stroke-width": 2 }));
    legend.push(textEl(624, ly, `level ${t}: ${nodes.length} nodes, ${range}`));
  });

  const body = [
    titleBlock(
      70,
      "nested annuli by level",
      `${alphaLabel(tree.alpha)}, delta=${tree.delta}, depth=${tree.depth}`,
    ),
    rings.join("\n"),
    legend.join("\n"),
    textEl(cx, H - 16, "tick angle = 2*pi*{n*alpha}", { "text-anchor": "middle", fill: "#555555" }),
  ];
  return svgDoc(W, H, [`source-manifest ${man.determinism_hash}`], body);
}

/**
 * Measure increments against window size, log-log, bracketed by the fitted
 * envelope: c_high * eps^(1/2) above, c_low * eps^(3/2) below.
 */
export function renderHolder(dir: string): string {
  const man = readManifest(dir);
  const table = readCsv(join(dir, "holder.csv"), "amofractal.holder", ["E", "eps", "dN"]);
  const rep = readJsonArtifact<HolderReportJson>(join(dir, "holder.json"), "holder-report/1");
  const pts: [number, number][] = [];
  let dropped = 0;
  for (const [, eps, dN] of table.rows) {
    if (eps > 0 && dN > 0) pts.push([Math.log10(eps), Math.log10(dN)]);
    else dropped++;
  }
  if (pts.length === 0) throw new SchemaMismatchError(`${dir}: no positive increments to plot`);

  const lxs = pts.map((p) => p[0]);
  const lx0 = Math.min(...lxs) - 0.3;
  const lx1 = Math.max(...lxs) + 0.3;
  const highAt = (lx: number) => Math.log10(rep.c_high) + 0.5 * lx;
  const lowAt = (lx: number) => Math.log10(rep.c_low) + 1.5 * lx;
  const lys = pts.map((p) => p[1]);
  const yLo = Math.min(...lys, lowAt(lx0)) - 0.3;
  const yHi = Math.max(...lys, highAt(lx1)) + 0.3;

  const W = 820;
  const H = 600;
  const x = linearScale(lx0, lx1, 80, W - 40);
  const y = linearScale(yLo, yHi, H - 50, 56);
  const scatter = pts.map(([lx, ly]) =>
    el("circle", { cx: x.map(lx), cy: y.map(ly), r: 2, fill: SERIES_COLOR, "fill-opacity": 0.65, class: "pt" }),
  );
  const guides = [
    el("line", {
      x1: x.map(lx0),
      y1: y.map(highAt(lx0)),
      x2: x.map(lx1),
      y2: y.map(highAt(lx1)),
      stroke: ACCENT_COLOR,
      "stroke-width": 1.2,
      "stroke-dasharray": "6 3",
      class: "guide-high",
    }),
    textEl(x.map(lx1) - 4, y.map(highAt(lx1)) - 6, "c_high * eps^(1/2)", {
      "text-anchor": "end",
      fill: ACCENT_COLOR,
    }),
    el("line", {
      x1: x.map(lx0),
      y1: y.map(lowAt(lx0)),
      x2: x.map(lx1),
      y2: y.map(lowAt(lx1)),
      stroke: GUIDE_LOW_COLOR,
      "stroke-width": 1.2,
      "stroke-dasharray": "6 3",
      class: "guide-low",
    }),
    textEl(x.map(lx1) - 4, y.map(lowAt(lx1)) + 14, "c_low * eps^(3/2)", {
      "text-anchor": "end",
      fill: GUIDE_LOW_COLOR,
    }),
  ];
  const droppedNote = dropped > 0 ? `, ${dropped} nonpositive increments dropped` : "";
  const body = [
    titleBlock(
      80,
      "measure increments across scales",
      `${rep.energies} energies, c_low=${fmt(rep.c_low)}, c_high=${fmt(rep.c_high)}, violations=${rep.violations}${droppedNote}`,
    ),
    guides.join("\n"),
    scatter.join("\n"),
    axisX(x, H - 50, intTicks(lx0, lx1), (v) => `1e${v}`),
    axisY(y, 80, intTicks(yLo, yHi), (v) => `1e${v}`),
    textEl(W - 40, H - 14, "window eps", { "text-anchor": "end" }),
    textEl(80, 52, "increment"),
  ];
  return svgDoc(W, H, [`source-manifest ${man.determinism_hash}`], body);
}

/** Dispatch by figure kind.  staircase takes two directories, the rest one. */
export function render(kind: string, inputs: string[]): string {
  switch (kind) {
    case "butterfly":
    case "tail":
    case "cantor":
    case "holder": {
      if (inputs.length !== 1) throw new UsageError(`${kind} takes exactly one artifact directory`);
      const dir = inputs[0];
      if (kind === "butterfly") return renderButterfly(dir);
      if (kind === "tail") return renderTail(dir);
      if (kind === "cantor") return renderCantor(dir);
      return renderHolder(dir);
    }
    case "staircase":
      if (inputs.length !== 2) {
        throw new UsageError("staircase takes the ids artifact directory, then the gaps artifact directory");
      }
      return renderStaircase(inputs[0], inputs[1]);
    default:
      throw new UsageError(`unknown figure kind "${kind}"; expected one of: ${FIGURE_KINDS.join(", ")}`);
  }
}
