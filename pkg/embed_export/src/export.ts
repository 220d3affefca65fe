import { Encoder, createEncoder } from "./encoder";
import { readLabelFile, writeLabeledTsv } from "./tsv";

export interface ExportJob {
  model: string;
  labelsPath: string;
  outPath: string;
  batchSize: number;
}

export interface ExportResult {
  labels: string[];
  dim: number;
  outPath: string;
}

/**
 * Encode every label in the input file and write them as labeled TSV,
 * one row per label in input order. The batch size only bounds how many
 * labels hit the model at once; it never changes the output.
 */
export async function runExport(job: ExportJob, encoder?: Encoder): Promise<ExportResult> {
  if (!Number.isInteger(job.batchSize) || job.batchSize < 1) {
    throw new Error(`batch size must be a positive integer, got ${job.batchSize}`);
  }
  const enc = encoder ?? createEncoder(job.model);
  const labels = await readLabelFile(job.labelsPath);
  if (labels.length === 0) {
    throw new Error(`${job.labelsPath}: no labels`);
  }

  const vectors: number[][] = [];
  for (let start = 0; start < labels.length; start += job.batchSize) {
    const batch = labels.slice(start, start + job.batchSize);
    const encoded = await enc.embed(batch);
    if (encoded.length !== batch.length) {
      throw new Error(`encoder returned ${encoded.length} vectors for ${batch.length} labels`);
    }
    vectors.push(...encoded);
  }

  const dim = vectors[0].length;
  for (let i = 0; i < vectors.length; i++) {
    if (vectors[i].length !== dim) {
      throw new Error(
        `dimension changed mid-export at ${JSON.stringify(labels[i])}: ${vectors[i].length} != ${dim}`,
      );
    }
  }

  await writeLabeledTsv(job.outPath, labels, vectors);
  return { labels, dim, outPath: job.outPath };
}
