export {
  FIGURE_KINDS,
  UsageError,
  render,
  renderButterfly,
  renderCantor,
  renderHolder,
  renderStaircase,
  renderTail,
} from "./figures.js";
export type { FigureKind } from "./figures.js";
export {
  SchemaMismatchError,
  alphaLabel,
  alphaValue,
  readCsv,
  readJsonArtifact,
  readManifest,
} from "./schema.js";
export type { AlphaSpecJson, CantorTreeJson, CsvTable, Manifest, TreeNodeJson } from "./schema.js";
export { el, escapeXml, fmt, linearScale, svgDoc } from "./svg.js";
export { run } from "./cli.js";
