import { createHash } from "node:crypto";

/** Default checkpoint: the sentence encoder the measurements were made with. */
export const DEFAULT_MODEL = "Xenova/all-mpnet-base-v2";

export interface Encoder {
  readonly modelId: string;
  /** One unit-norm vector per label, same order, constant dimension. */
  embed(labels: string[]): Promise<number[][]>;
}

function l2Normalize(vector: number[]): number[] {
  let sum = 0;
  for (const v of vector) sum += v * v;
  const norm = Math.sqrt(sum);
  if (norm === 0) {
    throw new Error("encoder produced a zero vector");
  }
  return vector.map((v) => v / norm);
}

/**
 * Deterministic offline encoder: each label is hashed into a fixed-dimension
 * pseudo-random direction. No semantics, but stable across runs and
 * platforms, which is what pipeline tests and dry runs need. Selected with
 * model id "hash-v1" or "hash-v1:<dim>".
 */
export class HashEncoder implements Encoder {
  readonly modelId: string;
  readonly dim: number;

  constructor(dim = 64) {
    if (!Number.isInteger(dim) || dim < 2) {
      throw new Error(`hash encoder dimension must be an integer >= 2, got ${dim}`);
    }
    this.dim = dim;
    this.modelId = dim === 64 ? "hash-v1" : `hash-v1:${dim}`;
  }

  private encodeOne(label: string): number[] {
    const values: number[] = [];
    // sha256 in counter mode, 8 big-endian u32 lanes per block
    for (let block = 0; values.length < this.dim; block++) {
      const counter = Buffer.alloc(4);
      counter.writeUInt32BE(block);
      const digest = createHash("sha256")
        .update(Buffer.from(label, "utf-8"))
        .update(Buffer.from([0]))
        .update(counter)
        .digest();
      for (let i = 0; i + 4 <= digest.length && values.length < this.dim; i += 4) {
        values.push((digest.readUInt32BE(i) / 0x100000000) * 2 - 1);
      }
    }
    return l2Normalize(values);
  }

  async embed(labels: string[]): Promise<number[][]> {
    return labels.map((label) => this.encodeOne(label));
  }
}

/**
 * Real model inference through @xenova/transformers (an optional peer):
 * feature extraction with mean pooling over final-layer token states,
 * then L2 normalization.
 */
export class TransformersEncoder implements Encoder {
  readonly modelId: string;
  private extractor: Promise<any> | undefined;

  constructor(modelId: string) {
    this.modelId = modelId;
  }

  private getExtractor(): Promise<any> {
    if (!this.extractor) {
      this.extractor = (async () => {
        let transformers: any;
        try {
          transformers = await import("@xenova/transformers");
        } catch {
          throw new Error(
            `model backend not installed; run "npm install @xenova/transformers" ` +
              `to encode with ${this.modelId}, or use model id "hash-v1" for the ` +
              `deterministic offline encoder`,
          );
        }
        return transformers.pipeline("feature-extraction", this.modelId);
      })();
    }
    return this.extractor;
  }

  async embed(labels: string[]): Promise<number[][]> {
    const extractor = await this.getExtractor();
    const output = await extractor(labels, { pooling: "mean", normalize: true });
    const [rows, dim] = output.dims;
    if (rows !== labels.length) {
      throw new Error(`model returned ${rows} rows for ${labels.length} labels`);
    }
    const data: number[] = Array.from(output.data);
    const vectors: number[][] = [];
    for (let i = 0; i < rows; i++) {
      vectors.push(l2Normalize(data.slice(i * dim, (i + 1) * dim)));
    }
    return vectors;
  }
}

export function createEncoder(modelId: string): Encoder {
  if (modelId === "hash-v1") {
    return new HashEncoder();
  }
  const hashWithDim = modelId.match(/^hash-v1:(\d+)$/);
  if (hashWithDim) {
    return new HashEncoder(Number(hashWithDim[1]));
  }
  return new TransformersEncoder(modelId);
}
