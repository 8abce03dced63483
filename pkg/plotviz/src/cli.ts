#!/usr/bin/env node
/**
 * plot --csv <paths> --x <col> --y <col> [--logy] --group method,N --out <file>
 *
 * Reads benchmark CSVs and renders one figure. Paths after --csv are comma
 * separated (repeating the flag also works). Exits 2 on schema errors,
 * naming the missing column.
 */

import { SchemaError } from "./csv.js";
import { PlotSpec, render } from "./plot.js";

function usage(): string {
  return (
    "usage: plot --csv <paths> --x <col> --y <col> [--logy] " +
    "[--group cols] [--per-seed] [--title text] --out <file>"
  );
}

export function parseArgs(argv: string[]): PlotSpec {
  const spec: PlotSpec = {
    csvPaths: [], x: "k", y: "dist_sq", logY: false,
    group: ["method", "N"], perSeed: false, out: "plot.png",
  };
  let haveOut = false;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      i += 1;
      if (i >= argv.length) {
        throw new Error(`${arg} expects a value\n${usage()}`);
      }
      return argv[i];
    };
    switch (arg) {
      case "--csv":
        spec.csvPaths.push(...next().split(",").filter((p) => p.length));
        break;
      case "--x":
        spec.x = next();
        break;
      case "--y":
        spec.y = next();
        break;
      case "--logy":
        spec.logY = true;
        break;
      case "--group":
        spec.group = next().split(",").filter((g) => g.length);
        break;
      case "--per-seed":
        spec.perSeed = true;
        break;
      case "--title":
        spec.title = next();
        break;
      case "--out":
        spec.out = next();
        haveOut = true;
        break;
      default:
        throw new Error(`unknown argument ${arg}\n${usage()}`);
    }
  }
  if (spec.csvPaths.length === 0 || !haveOut) {
    throw new Error(usage());
  }
  return spec;
}

export function main(argv: string[]): number {
  let spec: PlotSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 2;
  }
  try {
    const written = render(spec);
    console.log(written);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error((err as Error).message);
    return 1;
  }
}

import { fileURLToPath } from "url";
if (process.argv[1] && fileURLToPath(import.meta.url) === process.argv[1]) {
  process.exit(main(process.argv.slice(2)));
}
