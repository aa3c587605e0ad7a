#!/usr/bin/env node
/**
 * encode --input corpus.ndjson [--model hash-256] [--truncate N] --output out.emb
 *
 * Input lines are {"id": "...", "text": "..."}. Writes the EMB1 binary file
 * plus a <output>.manifest.json sidecar with the model name, dimension,
 * entry count, and content hash. Identical input and model produce
 * byte-identical output.
 */

import { DEFAULT_MODEL } from "./encoder.js";
import { encodeCorpus } from "./encode.js";

function usage(): never {
  process.stderr.write(
    "usage: embedder encode --input <corpus.ndjson> --output <out.emb> " +
      `[--model ${DEFAULT_MODEL}] [--truncate N]\n`,
  );
  process.exit(1);
}

function main(argv: string[]): number {
  if (argv.length === 0 || argv[0] !== "encode") usage();
  let input: string | undefined;
  let output: string | undefined;
  let model = DEFAULT_MODEL;
  let truncate: number | undefined;
  for (let i = 1; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) usage();
    switch (flag) {
      case "--input":
        input = value;
        break;
      case "--output":
        output = value;
        break;
      case "--model":
        model = value;
        break;
      case "--truncate":
        truncate = Number(value);
        if (!Number.isInteger(truncate) || truncate < 1) {
          process.stderr.write(`--truncate must be a positive integer, got ${value}\n`);
          return 1;
        }
        break;
      default:
        usage();
    }
  }
  if (!input || !output) usage();
  try {
    const summary = encodeCorpus(input, output, model, truncate);
    process.stdout.write(
      `encoded ${summary.count} items (model ${summary.model}, dim ${summary.dim}) ` +
        `-> ${summary.output} sha256=${summary.sha256.slice(0, 12)}\n`,
    );
    return 0;
  } catch (exc) {
    process.stderr.write(`error: ${(exc as Error).message}\n`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
