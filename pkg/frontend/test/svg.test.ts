import { describe, expect, it } from "vitest";

import { el, escapeXml, fmt, intTicks, linearScale } from "../src/svg.js";

describe("fmt", () => {
  it("keeps integers exact and trims float noise", () => {
    expect(fmt(3)).toBe("3");
    expect(fmt(-0)).toBe("0");
    expect(fmt(0.25)).toBe("0.25");
    expect(fmt(123.456789012)).toBe("123.45679");
    expect(fmt(1e-7)).toBe("1.0000000e-7");
  });

  it("refuses non-finite values", () => {
    expect(() => fmt(Number.NaN)).toThrow();
    expect(() => fmt(Number.POSITIVE_INFINITY)).toThrow();
  });
});

describe("el", () => {
  it("formats numeric attributes and escapes strings", () => {
    expect(el("line", { x1: 0.5, stroke: "#333333" })).toBe('<line x1="0.5" stroke="#333333"/>');
    expect(el("g", { id: "a<b" }, "inner")).toBe('<g id="a&lt;b">inner</g>');
  });
});

describe("escapeXml", () => {
  it("escapes the five reserved characters", () => {
    expect(escapeXml(`<&>"'`)).toBe("&lt;&amp;&gt;&quot;&apos;");
  });
});

describe("linearScale", () => {
  it("maps endpoints to endpoints", () => {
    const s = linearScale(0, 10, 100, 200);
    expect(s.map(0)).toBe(100);
    expect(s.map(10)).toBe(200);
    expect(s.map(5)).toBe(150);
    expect(() => linearScale(1, 1, 0, 1)).toThrow();
  });
});

describe("intTicks", () => {
  it("returns the integers inside the interval", () => {
    expect(intTicks(2, 4)).toEqual([2, 3, 4]);
    expect(intTicks(-4.2, -1.7)).toEqual([-4, -3, -2]);
    expect(intTicks(0.2, 0.8)).toEqual([]);
  });
});
