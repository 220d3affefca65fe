export { DEFAULT_MODEL, Encoder, HashEncoder, TransformersEncoder, createEncoder } from "./encoder";
export { ExportJob, ExportResult, runExport } from "./export";
export { createApp } from "./server";
export { formatLabeledTsv, parseLabeledTsv, readLabelFile, writeLabeledTsv } from "./tsv";
