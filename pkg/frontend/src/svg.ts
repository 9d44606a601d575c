/**
 * Minimal deterministic SVG string building.  No DOM, no dates, no randomness:
 * the same inputs always produce byte-identical output, which is what lets the
 * tests pin figure hashes.
 */

const XML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
  "'": "&apos;",
};

export function escapeXml(s: string): string {
  return s.replace(/[&<>"']/g, (ch) => XML_ESCAPES[ch] as string);
}

/**
 * Stable decimal formatting for coordinates and displayed values.  ECMA-262
 * fully specifies toPrecision, so this is platform-independent.
 */
export function fmt(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite value ${x}`);
  if (Number.isInteger(x)) return String(x);
  const s = x.toPrecision(8);
  if (s.includes("e")) return s;
  const trimmed = s.replace(/\.?0+$/, "");
  return trimmed === "-0" ? "0" : trimmed;
}

export type Attrs = Record<string, string | number>;

/** One element.  Numeric attribute values go through fmt; body is raw markup. */
export function el(tag: string, attrs: Attrs, body?: string): string {
  let out = `<${tag}`;
  for (const [k, v] of Object.entries(attrs)) {
    out += ` ${k}="${typeof v === "number" ? fmt(v) : escapeXml(v)}"`;
  }
  return body === undefined || body === "" ? `${out}/>` : `${out}>${body}</${tag}>`;
}

export function textEl(x: number, y: number, s: string, attrs: Attrs = {}): string {
  return el("text", { x, y, "font-family": "monospace", "font-size": 11, ...attrs }, escapeXml(s));
}

export interface Scale {
  d0: number;
  d1: number;
  map(v: number): number;
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  if (d0 === d1) throw new Error("degenerate scale domain");
  return { d0, d1, map: (v: number) => r0 + ((v - d0) * (r1 - r0)) / (d1 - d0) };
}

export function axisX(s: Scale, y0: number, ticks: number[], label: (v: number) => string): string {
  const parts = [
    el("line", { x1: s.map(s.d0), y1: y0, x2: s.map(s.d1), y2: y0, stroke: "#333333", "stroke-width": 1 }),
  ];
  for (const t of ticks) {
    const x = s.map(t);
    parts.push(el("line", { x1: x, y1: y0, x2: x, y2: y0 + 5, stroke: "#333333", "stroke-width": 1 }));
    parts.push(textEl(x, y0 + 18, label(t), { "text-anchor": "middle" }));
  }
  return parts.join("\n");
}

export function axisY(s: Scale, x0: number, ticks: number[], label: (v: number) => string): string {
  const parts = [
    el("line", { x1: x0, y1: s.map(s.d0), x2: x0, y2: s.map(s.d1), stroke: "#333333", "stroke-width": 1 }),
  ];
  for (const t of ticks) {
    const y = s.map(t);
    parts.push(el("line", { x1: x0 - 5, y1: y, x2: x0, y2: y, stroke: "#333333", "stroke-width": 1 }));
    parts.push(textEl(x0 - 8, y + 4, label(t), { "text-anchor": "end" }));
  }
  return parts.join("\n");
}

/** Integer ticks spanning [a, b], used for decade axes on log plots. */
export function intTicks(a: number, b: number): number[] {
  const out: number[] = [];
  for (let t = Math.ceil(a); t <= Math.floor(b); t++) out.push(t);
  return out;
}

/**
 * Assemble the document.  metadataLines end up inside <metadata>; every figure
 * puts its source manifest hashes there so output can be traced back to the
 * exact artifact run that produced it.
 */
export function svgDoc(width: number, height: number, metadataLines: string[], body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`,
    `<metadata>\n${metadataLines.map(escapeXml).join("\n")}\n</metadata>`,
    el("rect", { x: 0, y: 0, width, height, fill: "#ffffff" }),
    ...body,
    "</svg>",
    "",
  ].join("\n");
}

export function titleBlock(x: number, main: string, sub: string): string {
  return [
    textEl(x, 24, main, { "font-size": 14, "font-weight": "bold" }),
    textEl(x, 40, sub, { fill: "#555555" }),
  ].join("\n");
}
