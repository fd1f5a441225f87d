/**
 * Figure recipes: pure functions of the CSV/JSON files the physics pipeline
 * emitted.  Every fitted quantity or marker (N_p, omega*, windows) is read
 * from the sidecars; nothing numerical is recomputed here.
 */

import { basename } from "node:path";

import { FigureError, Table, column, expandGlob, parseCsv, readSidecar } from "./csv.js";
import { PALETTE, Scene, Viewport, logRange, padRange } from "./svg.js";

export interface LanczosGrowthRecipe {
  kind: "lanczos-growth";
  dataGlob: string; // lanczos_eta*.csv
  npScalingPath: string; // np_scaling.csv
  outPath: string;
}

export interface ToyGrowthRatioRecipe {
  kind: "toy-growth-ratio";
  bcPath: string; // lanczos_from_moments.csv
  ratioPath: string; // ratio.csv
  outPath: string;
}

export interface SpectralCrossoverRecipe {
  kind: "spectral-crossover";
  dataGlob: string; // spectral_eta*.csv
  outPath: string;
}

export type FigureRecipe = LanczosGrowthRecipe | ToyGrowthRatioRecipe | SpectralCrossoverRecipe;

function etaLabel(csvPath: string, table: Table): string {
  const meta = readSidecar(csvPath);
  if (typeof meta.eta === "string" || typeof meta.eta === "number") {
    return `eta = ${meta.eta}`;
  }
  return basename(table.path).replace(/\.csv$/, "");
}

// ---------------------------------------------------------------------------

export function renderLanczosGrowth(recipe: LanczosGrowthRecipe): string {
  const files = expandGlob(recipe.dataGlob);
  const scene = new Scene(820, 560);
  const curves = files.map((f) => {
    const t = parseCsv(f);
    const n = column(t, "n");
    const sq = column(t, "sqrt_bc_abs");
    return { label: etaLabel(f, t), n: n.slice(1), sq: sq.slice(1) }; // drop the n=0 convention row
  });
  const allN = curves.flatMap((c) => c.n);
  const allY = curves.flatMap((c) => c.sq).filter((v) => isFinite(v));
  const main: Viewport = {
    x0: 80,
    y0: 50,
    width: 560,
    height: 420,
    xAxis: "linear",
    yAxis: "linear",
    xRange: [0, Math.max(...allN) + 1],
    yRange: padRange(0, Math.max(...allY)),
  };
  scene.axes(main, "iteration n", "|sqrt(b_n c_n)|");
  curves.forEach((c, i) => {
    const color = PALETTE[i % PALETTE.length];
    scene.polyline(main, c.n, c.sq, color);
    scene.markers(main, c.n, c.sq, color, 2.2);
  });
  scene.legend(
    96,
    74,
    curves.map((c, i) => [c.label, PALETTE[i % PALETTE.length]]),
  );

  // inset: deviation point N_p against 1/eta (linear scaling = the 1/eta law)
  const np = parseCsv(recipe.npScalingPath);
  const etasText = column(np, "eta");
  const nps = column(np, "n_p");
  const invEta = etasText.map((e) => 1 / e);
  const pts = invEta
    .map((x, i) => [x, nps[i]] as const)
    .filter(([x, y]) => isFinite(x) && isFinite(y));
  if (pts.length > 0) {
    const inset: Viewport = {
      x0: 660,
      y0: 70,
      width: 140,
      height: 130,
      xAxis: "linear",
      yAxis: "linear",
      xRange: padRange(0, Math.max(...pts.map((p) => p[0]))),
      yRange: padRange(0, Math.max(...pts.map((p) => p[1]))),
    };
    scene.insetBackground(inset);
    scene.axes(inset, "1/eta", "N_p", 9);
    scene.markers(
      inset,
      pts.map((p) => p[0]),
      pts.map((p) => p[1]),
      "#000",
      2.6,
    );
  }
  return scene.toString();
}

// ---------------------------------------------------------------------------

export function renderToyGrowthRatio(recipe: ToyGrowthRatioRecipe): string {
  const bcTable = parseCsv(recipe.bcPath);
  const n = column(bcTable, "n");
  const sq = column(bcTable, "sqrt_bc_abs");
  const meta = readSidecar(recipe.bcPath);
  const ratioTable = parseCsv(recipe.ratioPath);
  const rn = column(ratioTable, "n");
  const rv = column(ratioTable, "ratio");

  const scene = new Scene(960, 480);
  const left: Viewport = {
    x0: 70,
    y0: 50,
    width: 370,
    height: 350,
    xAxis: "linear",
    yAxis: "linear",
    xRange: [0, Math.max(...n) + 1],
    yRange: padRange(0, Math.max(...sq.filter((v) => isFinite(v)))),
  };
  scene.axes(left, "iteration n", "|sqrt(b_n c_n)|");
  scene.polyline(left, n, sq, PALETTE[0]);
  scene.markers(left, n, sq, PALETTE[0], 2.2);
  if (typeof meta.n_p === "number") {
    scene.vline(left, meta.n_p, "#555");
    scene.label(left.x0 + 8, left.y0 + 16, `N_p = ${meta.n_p}`, 12, "#555");
  }
  scene.label(left.x0, left.y0 - 12, "(a) growth of the Lanczos products", 13);

  const right: Viewport = {
    x0: 540,
    y0: 50,
    width: 370,
    height: 350,
    xAxis: "linear",
    yAxis: "linear",
    xRange: [0, Math.max(...rn) + 1],
    yRange: padRange(Math.min(...rv, 0), Math.max(...rv, 1)),
  };
  scene.axes(right, "pair index n", "ratio of even moments");
  scene.hline(right, 0, "#888");
  scene.polyline(right, rn, rv, PALETTE[1]);
  scene.markers(right, rn, rv, PALETTE[1], 2.2);
  const crossing = meta.ratio_first_sign_change;
  if (typeof crossing === "number") {
    scene.vline(right, crossing, "#555");
    scene.label(right.x0 + 8, right.y0 + 16, `first sign change at n = ${crossing}`, 12, "#555");
  }
  scene.label(right.x0, right.y0 - 12, "(b) dissipative / closed moment ratio", 13);
  return scene.toString();
}

// ---------------------------------------------------------------------------

export function renderSpectralCrossover(recipe: SpectralCrossoverRecipe): string {
  const files = expandGlob(recipe.dataGlob);
  const scene = new Scene(820, 560);
  const curves = files.map((f) => {
    const t = parseCsv(f);
    const meta = readSidecar(f);
    const star =
      typeof meta.omega_star_formula === "number"
        ? meta.omega_star_formula
        : typeof meta.omega_star_fit === "number"
          ? meta.omega_star_fit
          : undefined;
    return {
      label: etaLabel(f, t),
      omega: column(t, "omega"),
      phi: column(t, "phi"),
      star,
    };
  });
  const allW = curves.flatMap((c) => c.omega);
  const allP = curves.flatMap((c) => c.phi);
  const main: Viewport = {
    x0: 90,
    y0: 50,
    width: 560,
    height: 430,
    xAxis: "log",
    yAxis: "log",
    xRange: logRange(allW),
    yRange: logRange(allP),
  };
  scene.axes(main, "omega", "phi(omega)");
  curves.forEach((c, i) => {
    const color = PALETTE[i % PALETTE.length];
    scene.polyline(main, c.omega, c.phi, color);
    if (typeof c.star === "number") {
      scene.vline(main, c.star, color);
    }
  });
  scene.legend(
    110,
    76,
    curves.map((c, i) => [c.label, PALETTE[i % PALETTE.length]]),
  );

  // inset: same curves on a log-linear scale
  const inset: Viewport = {
    x0: 672,
    y0: 300,
    width: 124,
    height: 130,
    xAxis: "linear",
    yAxis: "log",
    xRange: [Math.min(...allW), Math.max(...allW)],
    yRange: logRange(allP),
  };
  scene.insetBackground(inset);
  scene.axes(inset, "omega", "phi", 8);
  curves.forEach((c, i) => {
    scene.polyline(inset, c.omega, c.phi, PALETTE[i % PALETTE.length], 1.0);
    if (typeof c.star === "number") {
      scene.vline(inset, c.star, PALETTE[i % PALETTE.length]);
    }
  });
  return scene.toString();
}

export function render(recipe: FigureRecipe): string {
  switch (recipe.kind) {
    case "lanczos-growth":
      return renderLanczosGrowth(recipe);
    case "toy-growth-ratio":
      return renderToyGrowthRatio(recipe);
    case "spectral-crossover":
      return renderSpectralCrossover(recipe);
    default: {
      const never: never = recipe;
      throw new FigureError(`unknown recipe ${(never as FigureRecipe).kind}`);
    }
  }
}
