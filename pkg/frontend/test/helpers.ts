import { createHash } from "node:crypto";
import { fileURLToPath } from "node:url";

export function fixture(name: string): string {
  return fileURLToPath(new URL(`../fixtures/${name}`, import.meta.url));
}

export function sha256(s: string): string {
  return createHash("sha256").update(s).digest("hex");
}

// sha256 of each figure rendered from the committed fixture artifacts; any
// change to renderer output or fixtures must update these deliberately
export const FROZEN_HASHES = {
  butterfly: "67e1a83abe34448ff8f2723f4a300d3f0c58d512beca85590ef6ddb5c7858e21",
  staircase: "1d11188298f04e0eee1aa9e1f95175f81610858a8ca16a19806eeff43c83433d",
  tail: "f978ac8f8916185782ff9a643f6a295e7488483a32428fa01a000ff3bafe5244",
  cantor: "6fe83691ac14595398e1261e32ef5534d504db8e28a3f074a1e5246aa7b5a6d7",
  holder: "70fde1bcf97aa0f4c62e776108462640eed4ac8d09f215964cc7982b9d761f02",
} as const;
