/**
 * Deterministic sentence encoders.
 *
 * The built-in `hash-<dim>` family embeds text by feature-hashing word
 * unigrams and character trigrams into a fixed number of signed buckets and
 * L2-normalizing the result. It is fast, dependency-free, and bit-stable
 * across runs and platforms, which makes it the default for tests and small
 * corpora. Transformer-based sentence encoders can slot in behind the same
 * interface but are not bundled.
 */

export interface Encoder {
  readonly name: string;
  readonly dim: number;
  encode(text: string): Float32Array;
}

export const DEFAULT_MODEL = "hash-256";

const FNV_OFFSET = 0x811c9dc5;
const FNV_PRIME = 0x01000193;

function fnv1a(bytes: string): number {
  let h = FNV_OFFSET;
  for (let i = 0; i < bytes.length; i++) {
    h ^= bytes.charCodeAt(i);
    h = Math.imul(h, FNV_PRIME) >>> 0;
  }
  return h >>> 0;
}

function tokenize(text: string): string[] {
  return text
    .toLowerCase()
    .split(/[^\p{L}\p{N}]+/u)
    .filter((t) => t.length > 0);
}

function* features(text: string): Generator<string> {
  for (const token of tokenize(text)) {
    yield `w:${token}`;
    const padded = `^${token}$`;
    for (let i = 0; i + 3 <= padded.length; i++) {
      yield `g:${padded.slice(i, i + 3)}`;
    }
  }
}

class HashEncoder implements Encoder {
  readonly name: string;
  readonly dim: number;

  constructor(dim: number) {
    this.name = `hash-${dim}`;
    this.dim = dim;
  }

  encode(text: string): Float32Array {
    const acc = new Float64Array(this.dim);
    for (const feature of features(text)) {
      const h = fnv1a(feature);
      const sign = (h & 1) === 0 ? 1 : -1;
      acc[(h >>> 1) % this.dim] += sign;
    }
    let norm = 0;
    for (let i = 0; i < this.dim; i++) norm += acc[i] * acc[i];
    norm = Math.sqrt(norm);
    const out = new Float32Array(this.dim);
    if (norm > 0) {
      for (let i = 0; i < this.dim; i++) out[i] = Math.fround(acc[i] / norm);
    }
    return out;
  }
}

export function makeEncoder(model: string = DEFAULT_MODEL): Encoder {
  const match = /^hash-(\d+)$/.exec(model);
  if (match) {
    const dim = Number(match[1]);
    if (dim < 1 || dim > 65536) {
      throw new Error(`hash encoder dimension out of range: ${dim}`);
    }
    return new HashEncoder(dim);
  }
  throw new Error(
    `unknown model "${model}": bundled models are hash-<dim> (e.g. ${DEFAULT_MODEL}); ` +
      "transformer sentence encoders must be wired in separately",
  );
}
