/**
 * Thin bindings over the trajkit CLI. Every operation shells out to the
 * installed executable and parses its delimited output, so the numbers
 * seen here are bitwise the ones the primary library computed; nothing
 * numerical is reimplemented on this side.
 */

import { readFileSync, mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { basename, extname, join } from "node:path";

import { runCli } from "./cli.js";
import {
  parseCanonicalCsv,
  parseDistanceMatrixCsv,
  parseFeatureMatrixCsv,
  parseLandmarksCsv,
} from "./csv.js";
import type { Dataset, DistanceMatrix, FeatureMatrix, Landmarks } from "./csv.js";

export { cliPath, runCli } from "./cli.js";
export { SpecError, DataError } from "./errors.js";
export {
  parseCanonicalCsv,
  parseDistanceMatrixCsv,
  parseFeatureMatrixCsv,
  parseLandmarksCsv,
  toCanonicalCsv,
} from "./csv.js";
export type {
  Dataset,
  DistanceMatrix,
  FeatureMatrix,
  Landmarks,
  TrajectoryRecord,
  Waypoint,
} from "./csv.js";

export type DatasetFormat = "canonical-csv" | "geolife-plt" | "tdrive-txt";

export type FeatureKind =
  | "vq"
  | "vq_exp"
  | "vq_sigma"
  | "endpoints"
  | "physical"
  | "vq_plus"
  | "vq_sigma_plus";

export type DistanceName =
  | "dq"
  | "dq_pi"
  | "hausdorff"
  | "frechet"
  | "dtw"
  | "lcss"
  | "edr"
  | "erp"
  | "sspd"
  | "lsh";

/** Landmark sourcing shared by featurize and the landmark-based distances. */
export interface LandmarkOptions {
  /** Reuse a landmark CSV instead of generating a set. */
  landmarksFile?: string;
  strategy?: "random" | "mistake_driven";
  nLandmarks?: number;
  bestOf?: number;
  eta?: number;
}

export interface FeaturizeSpec extends LandmarkOptions {
  kind: FeatureKind;
  sigma?: number;
}

export interface DistanceParams extends LandmarkOptions {
  /** Feature kind compared by distance "dq". */
  kind?: "vq" | "vq_exp" | "vq_sigma";
  sigma?: number;
  epsilon?: number;
  gapPoint?: readonly [number, number];
  circles?: number;
  threads?: number;
}

export interface LoadOptions {
  /** Label assigned by converters for unlabeled formats. */
  label?: number;
  name?: string;
  /** geolife-plt: user directories, labeled by position. */
  users?: string[];
  /** tdrive-txt: taxi ids, labeled by position. */
  ids?: string[];
}

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "trajkit-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

function stem(path: string): string {
  return basename(path, extname(path));
}

function landmarkArgs(opts: LandmarkOptions, seed: number): string[] {
  const args: string[] = ["--seed", String(seed)];
  if (opts.landmarksFile !== undefined) {
    args.push("--landmarks", opts.landmarksFile);
  }
  if (opts.strategy !== undefined) {
    args.push("--strategy", opts.strategy);
  }
  if (opts.nLandmarks !== undefined) {
    args.push("--n-landmarks", String(opts.nLandmarks));
  }
  if (opts.bestOf !== undefined) {
    args.push("--best-of", String(opts.bestOf));
  }
  if (opts.eta !== undefined) {
    args.push("--eta", String(opts.eta));
  }
  return args;
}

/**
 * Load a trajectory dataset. Canonical CSV is read in place; the other
 * formats are converted through the CLI first.
 */
export function load_dataset(
  path: string,
  format: DatasetFormat = "canonical-csv",
  opts: LoadOptions = {},
): Dataset {
  const name = opts.name ?? stem(path);
  if (format === "canonical-csv") {
    return parseCanonicalCsv(readFileSync(path, "utf-8"), name);
  }
  return withTempDir((dir) => {
    const out = join(dir, "converted.csv");
    const args = ["convert", "--input", path, "--format", format, "--out", out];
    if (opts.label !== undefined) {
      args.push("--label", String(opts.label));
    }
    if (opts.name !== undefined) {
      args.push("--name", opts.name);
    }
    if (opts.users !== undefined) {
      args.push("--users", opts.users.join(","));
    }
    if (opts.ids !== undefined) {
      args.push("--ids", opts.ids.join(","));
    }
    runCli(args);
    return parseCanonicalCsv(readFileSync(out, "utf-8"), name);
  });
}

/**
 * Landmark feature matrix for every trajectory of a canonical CSV dataset,
 * one row per trajectory in file order.
 */
export function featurize(datasetPath: string, spec: FeaturizeSpec, seed = 0): FeatureMatrix {
  return withTempDir((dir) => {
    const out = join(dir, "features.csv");
    const args = [
      "featurize",
      "--input",
      datasetPath,
      "--kind",
      spec.kind,
      "--out",
      out,
    ];
    if (spec.sigma !== undefined) {
      args.push("--sigma", String(spec.sigma));
    }
    args.push(...landmarkArgs(spec, seed));
    runCli(args);
    return parseFeatureMatrixCsv(readFileSync(out, "utf-8"), spec.kind);
  });
}

/** Pairwise distance matrix over a canonical CSV dataset. */
export function distance_matrix(
  datasetPath: string,
  name: DistanceName,
  params: DistanceParams = {},
  seed = 0,
): DistanceMatrix {
  return withTempDir((dir) => {
    const out = join(dir, "distances.csv");
    const args = ["distmatrix", "--input", datasetPath, "--distance", name, "--out", out];
    if (params.kind !== undefined) {
      args.push("--kind", params.kind);
    }
    if (params.sigma !== undefined) {
      args.push("--sigma", String(params.sigma));
    }
    if (params.epsilon !== undefined) {
      args.push("--epsilon", String(params.epsilon));
    }
    if (params.gapPoint !== undefined) {
      args.push("--gap", `${params.gapPoint[0]},${params.gapPoint[1]}`);
    }
    if (params.circles !== undefined) {
      args.push("--circles", String(params.circles));
    }
    if (params.threads !== undefined) {
      args.push("--threads", String(params.threads));
    }
    args.push(...landmarkArgs(params, seed));
    runCli(args);
    return parseDistanceMatrixCsv(readFileSync(out, "utf-8"));
  });
}

function generateLandmarks(
  datasetPath: string,
  strategy: "random" | "mistake_driven",
  n: number,
  seed: number,
  opts: { bestOf?: number; eta?: number },
): Landmarks {
  return withTempDir((dir) => {
    const out = join(dir, "landmarks.csv");
    const args = [
      "landmarks",
      "--input",
      datasetPath,
      "--out",
      out,
      "--strategy",
      strategy,
      "--n-landmarks",
      String(n),
      "--seed",
      String(seed),
    ];
    if (opts.bestOf !== undefined) {
      args.push("--best-of", String(opts.bestOf));
    }
    if (opts.eta !== undefined) {
      args.push("--eta", String(opts.eta));
    }
    runCli(args);
    return parseLandmarksCsv(readFileSync(out, "utf-8"));
  });
}

/** Landmarks drawn from a normal fit to the dataset's pooled waypoints. */
export function random_landmarks(datasetPath: string, n: number, seed = 0): Landmarks {
  return generateLandmarks(datasetPath, "random", n, seed, {});
}

/**
 * Landmarks placed near misclassified trajectories of a two-class dataset,
 * best of several seeded candidates by training error.
 */
export function mistake_driven_landmarks(
  datasetPath: string,
  n: number,
  seed = 0,
  opts: { bestOf?: number; eta?: number } = {},
): Landmarks {
  return generateLandmarks(datasetPath, "mistake_driven", n, seed, opts);
}
