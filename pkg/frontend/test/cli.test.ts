import { copyFileSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { run } from "../src/cli.js";
import { FROZEN_HASHES, fixture, sha256 } from "./helpers.js";

function scratch(): string {
  return mkdtempSync(join(tmpdir(), "amoplot-cli-"));
}

describe("cli", () => {
  beforeEach(() => {
    vi.spyOn(console, "log").mockImplementation(() => {});
    vi.spyOn(console, "error").mockImplementation(() => {});
  });
  afterEach(() => {
    vi.restoreAllMocks();
  });

  it("writes the figure and exits 0", () => {
    const out = join(scratch(), "staircase.svg");
    expect(run(["staircase", fixture("ids"), fixture("gaps"), "--out", out])).toBe(0);
    expect(sha256(readFileSync(out, "utf8"))).toBe(FROZEN_HASHES.staircase);
  });

  it("prints usage on --help", () => {
    expect(run(["--help"])).toBe(0);
    expect(vi.mocked(console.log).mock.calls[0][0]).toContain("usage:");
  });

  it("exits 1 on usage problems", () => {
    const out = join(scratch(), "x.svg");
    expect(run([])).toBe(1);
    expect(run(["tail", fixture("tail")])).toBe(1); // no --out
    expect(run(["tail", fixture("tail"), "--out"])).toBe(1); // dangling flag
    expect(run(["nope", fixture("tail"), "--out", out])).toBe(1);
    expect(run(["staircase", fixture("ids"), "--out", out])).toBe(1);
    expect(run(["tail", join(scratch(), "missing"), "--out", out])).toBe(1);
  });

  it("exits 2 when an input fails schema validation", () => {
    const dir = scratch();
    copyFileSync(join(fixture("butterfly"), "manifest.json"), join(dir, "manifest.json"));
    writeFileSync(join(dir, "butterfly.csv"), "# schema amofractal.ids 1\np,q,E_lo,E_hi\n");
    expect(run(["butterfly", dir, "--out", join(dir, "x.svg")])).toBe(2);
    expect(vi.mocked(console.error).mock.calls.at(-1)![0]).toContain("schema mismatch");
  });
});
