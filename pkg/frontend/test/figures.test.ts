import { describe, expect, it } from "vitest";

import {
  render,
  renderButterfly,
  renderCantor,
  renderHolder,
  renderStaircase,
  renderTail,
} from "../src/figures.js";
import { SchemaMismatchError } from "../src/schema.js";
import { readManifest } from "../src/schema.js";
import { FROZEN_HASHES, fixture, sha256 } from "./helpers.js";

// render each kind once up front and reuse; all five together take well under
// a second, the butterfly dominating
const svgs = {
  butterfly: renderButterfly(fixture("butterfly")),
  staircase: renderStaircase(fixture("ids"), fixture("gaps")),
  tail: renderTail(fixture("tail")),
  cantor: renderCantor(fixture("cantor")),
  holder: renderHolder(fixture("holder")),
};

function count(svg: string, needle: string): number {
  let n = 0;
  let i = svg.indexOf(needle);
  while (i !== -1) {
    n++;
    i = svg.indexOf(needle, i + needle.length);
  }
  return n;
}

describe("determinism", () => {
  it("repeat renders are byte-identical", () => {
    expect(renderButterfly(fixture("butterfly"))).toBe(svgs.butterfly);
    expect(renderStaircase(fixture("ids"), fixture("gaps"))).toBe(svgs.staircase);
    expect(renderTail(fixture("tail"))).toBe(svgs.tail);
    expect(renderCantor(fixture("cantor"))).toBe(svgs.cantor);
    expect(renderHolder(fixture("holder"))).toBe(svgs.holder);
  });

  it("output hashes match the frozen values", () => {
    for (const kind of Object.keys(FROZEN_HASHES) as (keyof typeof FROZEN_HASHES)[]) {
      expect(sha256(svgs[kind]), kind).toBe(FROZEN_HASHES[kind]);
    }
  });

  it("every figure embeds its source manifest hashes in metadata", () => {
    const sources: [keyof typeof svgs, string[]][] = [
      ["butterfly", ["butterfly"]],
      ["staircase", ["ids", "gaps"]],
      ["tail", ["tail"]],
      ["cantor", ["cantor"]],
      ["holder", ["holder"]],
    ];
    for (const [kind, dirs] of sources) {
      const svg = svgs[kind];
      expect(svg).toContain("<metadata>");
      for (const d of dirs) {
        expect(svg, `${kind} <- ${d}`).toContain(`source-manifest ${readManifest(fixture(d)).determinism_hash}`);
      }
    }
  });
});

describe("butterfly", () => {
  it("draws one segment per band row", () => {
    expect(count(svgs.butterfly, 'stroke="#26247a"')).toBe(25650);
  });

  it("names the coupling and flux cap", () => {
    expect(svgs.butterfly).toContain("lambda=1, q &lt;= 50, 25650 bands");
  });
});

describe("staircase", () => {
  it("labels exactly the four interior plateaus, in order", () => {
    const labels = [...svgs.staircase.matchAll(/class="gap-label">(k=[+-]\d+)</g)].map((m) => m[1]);
    expect(labels).toEqual(["k=-2", "k=+1", "k=-1", "k=+2"]);
  });

  it("is a monotone staircase", () => {
    const d = /<path d="([^"]+)"/.exec(svgs.staircase)![1];
    const pts = [...d.matchAll(/[ML] ([-\d.]+) ([-\d.]+)/g)].map((m) => [Number(m[1]), Number(m[2])]);
    expect(pts.length).toBeGreaterThan(20);
    for (let i = 1; i < pts.length; i++) {
      expect(pts[i][0]).toBeGreaterThanOrEqual(pts[i - 1][0]);
      // svg y grows downward, so nonincreasing y means nondecreasing N
      expect(pts[i][1]).toBeLessThanOrEqual(pts[i - 1][1]);
    }
  });

  it("refuses mismatched input runs", () => {
    expect(() => renderStaircase(fixture("ids"), fixture("tail"))).toThrow(SchemaMismatchError);
  });
});

describe("tail", () => {
  it("decays one decade per decade", () => {
    expect(svgs.tail).toMatch(/empirical slope -1\.00\d+/);
  });

  it("draws one point per cutoff with the prediction dashed", () => {
    expect(count(svgs.tail, 'class="pt"')).toBe(5);
    expect(svgs.tail).toContain('stroke-dasharray="5 3"');
  });
});

describe("cantor", () => {
  it("ticks every node on its level ring", () => {
    expect(count(svgs.cantor, 'class="tick-1"')).toBe(72);
    expect(count(svgs.cantor, 'class="tick-2"')).toBe(14);
    expect(count(svgs.cantor, 'stroke="#cccccc"')).toBe(2);
  });

  it("annotates the per-level outer radius ranges", () => {
    expect(svgs.cantor).toContain("level 1: 72 nodes, log10 r in [-3.2750215, -1.6489619]");
    expect(svgs.cantor).toContain("level 2: 14 nodes, log10 r in [-10.104981, -5.4583691]");
    expect(svgs.cantor).toContain("alpha=(-1+sqrt(5))/2");
  });
});

describe("holder", () => {
  it("brackets the cloud with both envelope guides", () => {
    expect(count(svgs.holder, 'class="pt"')).toBe(270);
    expect(svgs.holder).toContain('class="guide-high"');
    expect(svgs.holder).toContain('class="guide-low"');
  });

  it("reports the fitted constants", () => {
    expect(svgs.holder).toContain("c_low=1.4772503, c_high=0.45861904, violations=0");
  });
});

describe("render dispatcher", () => {
  it("routes kinds and enforces input arity", () => {
    expect(render("tail", [fixture("tail")])).toBe(svgs.tail);
    expect(() => render("tail", [fixture("tail"), fixture("tail")])).toThrow(/exactly one/);
    expect(() => render("staircase", [fixture("ids")])).toThrow(/ids artifact directory/);
    expect(() => render("whatever", [fixture("tail")])).toThrow(/unknown figure kind/);
  });
});
