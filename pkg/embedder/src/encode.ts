/**
 * NDJSON corpus -> EMB1 file with a sidecar manifest.
 */

import { createHash } from "node:crypto";
import { readFileSync, writeFileSync } from "node:fs";

import { Entry, writeEmb1 } from "./emb1.js";
import { DEFAULT_MODEL, makeEncoder } from "./encoder.js";

export interface CorpusItem {
  id: string;
  text: string;
}

export interface EncodeSummary {
  model: string;
  dim: number;
  count: number;
  sha256: string;
  output: string;
}

export function parseCorpus(raw: string, truncate?: number): CorpusItem[] {
  const items: CorpusItem[] = [];
  const seen = new Set<string>();
  const lines = raw.split("\n");
  for (let n = 0; n < lines.length; n++) {
    const line = lines[n].trim();
    if (line === "") continue;
    let obj: unknown;
    try {
      obj = JSON.parse(line);
    } catch (exc) {
      throw new Error(`line ${n + 1}: not valid JSON: ${(exc as Error).message}`);
    }
    const rec = obj as Record<string, unknown>;
    if (typeof rec.id !== "string" || rec.id === "") {
      throw new Error(`line ${n + 1}: missing or empty "id"`);
    }
    if (typeof rec.text !== "string" || rec.text === "") {
      throw new Error(`line ${n + 1}: missing or empty "text"`);
    }
    if (seen.has(rec.id)) {
      throw new Error(`line ${n + 1}: duplicate id "${rec.id}"`);
    }
    seen.add(rec.id);
    let text = rec.text;
    if (truncate !== undefined && text.length > truncate) {
      text = text.slice(0, truncate);
    }
    items.push({ id: rec.id, text });
  }
  return items;
}

export function encodeCorpus(
  inputPath: string,
  outputPath: string,
  model: string = DEFAULT_MODEL,
  truncate?: number,
): EncodeSummary {
  const encoder = makeEncoder(model);
  const items = parseCorpus(readFileSync(inputPath, "utf-8"), truncate);
  const entries: Entry[] = [];
  for (let n = 0; n < items.length; n++) {
    const vector = encoder.encode(items[n].text);
    if (vector.length !== encoder.dim) {
      throw new Error(
        `dimension drift at item "${items[n].id}": got ${vector.length}, expected ${encoder.dim}`,
      );
    }
    let norm = 0;
    for (let i = 0; i < vector.length; i++) norm += vector[i] * vector[i];
    if (norm === 0) {
      throw new Error(`item "${items[n].id}": text has no encodable tokens`);
    }
    entries.push({ id: items[n].id, vector });
  }
  const blob = writeEmb1(encoder.dim, entries);
  writeFileSync(outputPath, blob);
  const summary: EncodeSummary = {
    model: encoder.name,
    dim: encoder.dim,
    count: entries.length,
    sha256: createHash("sha256").update(blob).digest("hex"),
    output: outputPath,
  };
  writeFileSync(
    `${outputPath}.manifest.json`,
    JSON.stringify(
      { model: summary.model, dim: summary.dim, count: summary.count, sha256: summary.sha256 },
      ["count", "dim", "model", "sha256"],
      2,
    ) + "\n",
  );
  return summary;
}
