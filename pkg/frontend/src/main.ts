// CLI: render a bench CSV into an SVG figure.
//
//   node dist/main.js --in ordering_study.csv --kind orderings --out orderings.svg \
//        [--ref OPS | --manifest ordering_study_manifest.json]
//
// Exit codes: 0 ok, 2 schema/data mismatch (prints expected vs found),
// 64 usage error.

import * as fs from "node:fs";

import { parseBenchCsv } from "./csv.js";
import { renderOrderings, renderScaling } from "./render.js";
import { SchemaError } from "./schema.js";

interface Args {
  input: string;
  kind: "orderings" | "scaling";
  output: string;
  ref: number | null;
}

function usage(message: string): never {
  console.error(`error: ${message}`);
  console.error(
    "usage: main.js --in FILE.csv --kind {orderings|scaling} --out FILE.svg " +
    "[--ref OPS] [--manifest FILE.json]");
  process.exit(64);
}

function parseArgs(argv: string[]): Args {
  let input: string | undefined;
  let kind: string | undefined;
  let output: string | undefined;
  let ref: number | null = null;
  let manifest: string | undefined;
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) usage(`missing value for ${flag}`);
    switch (flag) {
      case "--in": input = value; break;
      case "--kind": kind = value; break;
      case "--out": output = value; break;
      case "--ref": ref = Number(value); break;
      case "--manifest": manifest = value; break;
      default: usage(`unknown flag ${flag}`);
    }
  }
  if (!input || !output) usage("--in and --out are required");
  if (kind !== "orderings" && kind !== "scaling") {
    usage(`--kind must be orderings or scaling, got ${kind}`);
  }
  if (ref !== null && !Number.isFinite(ref)) usage("--ref must be a number");
  if (ref === null && manifest) {
    const data = JSON.parse(fs.readFileSync(manifest, "utf-8"));
    ref = data?.mono_oracle?.total_ops ?? null;
  }
  return { input, kind, output, ref };
}

function main(): void {
  const args = parseArgs(process.argv.slice(2));
  let csvText: string;
  try {
    csvText = fs.readFileSync(args.input, "utf-8");
  } catch (err) {
    usage(`cannot read ${args.input}: ${(err as Error).message}`);
  }
  try {
    const records = parseBenchCsv(csvText);
    const svg = args.kind === "orderings"
      ? renderOrderings(records, args.ref)
      : renderScaling(records);
    fs.writeFileSync(args.output, svg);
    console.log(`wrote ${args.kind} figure to ${args.output}`);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      process.exit(2);
    }
    throw err;
  }
}

main();
