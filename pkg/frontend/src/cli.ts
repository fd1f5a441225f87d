/**
 * figures CLI: render SVG analogues of the growth / toy / spectral figures
 * from opgrowth CSV + sidecar outputs.
 *
 *   node dist/cli.js lanczos-growth --data "out/ising/lanczos_eta*.csv" \
 *        --np out/ising/np_scaling.csv --out fig_growth.svg
 *   node dist/cli.js toy --bc out/toy/lanczos_from_moments.csv \
 *        --ratio out/toy/ratio.csv --out fig_toy.svg
 *   node dist/cli.js spectral --data "out/spectral/spectral_eta*.csv" \
 *        --out fig_spectral.svg
 *
 * Schema violations and empty inputs are fatal: no image is written.
 */

import { writeFileSync } from "node:fs";

import { FigureError } from "./csv.js";
import { FigureRecipe, render } from "./recipes.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const val = argv[i + 1];
    if (!key?.startsWith("--") || val === undefined) {
      throw new FigureError(`malformed arguments near ${key ?? "<end>"}`);
    }
    flags.set(key.slice(2), val);
  }
  return flags;
}

function need(flags: Map<string, string>, name: string): string {
  const v = flags.get(name);
  if (!v) throw new FigureError(`missing required flag --${name}`);
  return v;
}

export function buildRecipe(argv: string[]): FigureRecipe {
  const [command, ...rest] = argv;
  const flags = parseFlags(rest);
  switch (command) {
    case "lanczos-growth":
      return {
        kind: "lanczos-growth",
        dataGlob: need(flags, "data"),
        npScalingPath: need(flags, "np"),
        outPath: need(flags, "out"),
      };
    case "toy":
      return {
        kind: "toy-growth-ratio",
        bcPath: need(flags, "bc"),
        ratioPath: need(flags, "ratio"),
        outPath: need(flags, "out"),
      };
    case "spectral":
      return {
        kind: "spectral-crossover",
        dataGlob: need(flags, "data"),
        outPath: need(flags, "out"),
      };
    default:
      throw new FigureError(
        `unknown figure ${command ?? "<none>"}; expected lanczos-growth | toy | spectral`,
      );
  }
}

export function runCli(argv: string[]): number {
  try {
    const recipe = buildRecipe(argv);
    const svg = render(recipe); // render fully before touching the output path
    writeFileSync(recipe.outPath, svg);
    process.stdout.write(`${recipe.outPath}\n`);
    return 0;
  } catch (err) {
    if (err instanceof FigureError) {
      process.stderr.write(`figure error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  process.exit(runCli(process.argv.slice(2)));
}
