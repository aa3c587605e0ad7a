/**
 * Bit-exact EMB1 binary format.
 *
 * Layout: magic "EMB1"; u32 LE dimension; u64 LE entry count; then per
 * entry a u32 LE id byte-length, the UTF-8 id bytes, and dim float32 LE
 * vector components. Vectors are written exactly as produced, with no
 * renormalization, so files round-trip byte-identically.
 */

export const MAGIC = Buffer.from("EMB1", "ascii");

export interface Entry {
  id: string;
  vector: Float32Array;
}

export function writeEmb1(dim: number, entries: Entry[]): Buffer {
  if (dim < 1) throw new Error(`dimension must be positive, got ${dim}`);
  const parts: Buffer[] = [];
  const header = Buffer.alloc(16);
  MAGIC.copy(header, 0);
  header.writeUInt32LE(dim, 4);
  header.writeBigUInt64LE(BigInt(entries.length), 8);
  parts.push(header);
  for (const entry of entries) {
    if (entry.vector.length !== dim) {
      throw new Error(
        `dimension drift: entry "${entry.id}" has ${entry.vector.length} components, expected ${dim}`,
      );
    }
    const id = Buffer.from(entry.id, "utf-8");
    const len = Buffer.alloc(4);
    len.writeUInt32LE(id.length, 0);
    const vec = Buffer.alloc(4 * dim);
    for (let i = 0; i < dim; i++) vec.writeFloatLE(entry.vector[i], 4 * i);
    parts.push(len, id, vec);
  }
  return Buffer.concat(parts);
}

export function readEmb1(data: Buffer): { dim: number; entries: Entry[] } {
  if (data.length < 16 || !data.subarray(0, 4).equals(MAGIC)) {
    throw new Error("not an EMB1 file");
  }
  const dim = data.readUInt32LE(4);
  const count = Number(data.readBigUInt64LE(8));
  let off = 16;
  const entries: Entry[] = [];
  for (let n = 0; n < count; n++) {
    if (off + 4 > data.length) throw new Error("truncated EMB1 file");
    const idLen = data.readUInt32LE(off);
    off += 4;
    if (off + idLen + 4 * dim > data.length) throw new Error("truncated EMB1 file");
    const id = data.subarray(off, off + idLen).toString("utf-8");
    off += idLen;
    const vector = new Float32Array(dim);
    for (let i = 0; i < dim; i++) vector[i] = data.readFloatLE(off + 4 * i);
    off += 4 * dim;
    entries.push({ id, vector });
  }
  if (off !== data.length) throw new Error("trailing bytes after final entry");
  return { dim, entries };
}
