import { readFile, writeFile } from "node:fs/promises";

/**
 * Read a label list: UTF-8, one label per line. Order is preserved.
 * Empty lines and duplicates are input mistakes the caller needs to fix,
 * not things to paper over, so both are hard errors naming the offender.
 */
export async function readLabelFile(path: string): Promise<string[]> {
  const text = await readFile(path, "utf-8");
  const lines = text.split(/\r?\n/);
  // a trailing newline is not an empty final label
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  const seen = new Set<string>();
  const labels: string[] = [];
  lines.forEach((line, index) => {
    if (line.trim() === "") {
      throw new Error(`${path}:${index + 1}: empty label line`);
    }
    if (line.includes("\t")) {
      throw new Error(`${path}:${index + 1}: label contains a tab: ${JSON.stringify(line)}`);
    }
    if (seen.has(line)) {
      throw new Error(`${path}:${index + 1}: duplicate label: ${JSON.stringify(line)}`);
    }
    seen.add(line);
    labels.push(line);
  });
  return labels;
}

/**
 * Render labeled TSV: one `label<TAB>v1 v2 ...` row per label, input order.
 * Number -> String in JS is the shortest representation that parses back to
 * the same double, so a round trip through the file is exact.
 */
export function formatLabeledTsv(labels: string[], vectors: number[][]): string {
  if (labels.length !== vectors.length) {
    throw new Error(`${labels.length} labels but ${vectors.length} vectors`);
  }
  const dim = vectors.length > 0 ? vectors[0].length : 0;
  const rows = labels.map((label, i) => {
    const vector = vectors[i];
    if (vector.length !== dim) {
      throw new Error(`dimension mismatch at ${JSON.stringify(label)}: ${vector.length} != ${dim}`);
    }
    for (const v of vector) {
      if (!Number.isFinite(v)) {
        throw new Error(`non-finite component for label ${JSON.stringify(label)}`);
      }
    }
    return `${label}\t${vector.map((v) => String(v)).join(" ")}`;
  });
  return rows.join("\n") + (rows.length > 0 ? "\n" : "");
}

export async function writeLabeledTsv(
  path: string,
  labels: string[],
  vectors: number[][],
): Promise<void> {
  await writeFile(path, formatLabeledTsv(labels, vectors), "utf-8");
}

/** Parse the TSV format back; used by tests and the serve/export cross-check. */
export function parseLabeledTsv(text: string): Map<string, number[]> {
  const vectors = new Map<string, number[]>();
  for (const line of text.split("\n")) {
    if (line.trim() === "") continue;
    const tab = line.indexOf("\t");
    if (tab < 0) {
      throw new Error(`expected label<TAB>components: ${JSON.stringify(line)}`);
    }
    const label = line.slice(0, tab);
    const components = line.slice(tab + 1).trim().split(/\s+/).map(Number);
    if (components.some((v) => !Number.isFinite(v))) {
      throw new Error(`non-finite component for label ${JSON.stringify(label)}`);
    }
    vectors.set(label, components);
  }
  return vectors;
}
