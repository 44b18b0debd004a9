/**
 * Bindings for the `medsil` clustering toolkit.
 *
 * Every call serialises its arrays once, hands them to the core through the
 * `medsil` command-line interface, and parses the JSON report back.  No
 * numerical work happens on this side of the boundary, so results are
 * bit-identical to what the CLI reports for the same input and
 * configuration.  Calls run in child processes and therefore never block
 * the Node event loop; concurrent calls on distinct inputs are safe.
 *
 * The executable is located as follows: `$MEDSIL_BIN` if set, otherwise
 * `$MEDSIL_PYTHON -m medsil.cli` if set, otherwise `medsil` on the PATH.
 */

import { execFile } from "node:child_process";
import { mkdtemp, rm, writeFile } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";

const execFileAsync = promisify(execFile);

export type Algo = "pamsil" | "pammedsil" | "fastmsc" | "fastermsc";
export type Init = "build" | "random";
export type Metric =
  | "euclidean"
  | "squared-euclidean"
  | "manhattan"
  | "cosine-distance";

export interface FitOptions {
  /** Number of medoids; must satisfy 2 <= k <= n. */
  k: number;
  /** Optimizer; the core defaults to the eager variant. */
  algo?: Algo;
  /** Initialization strategy; the core picks a per-algorithm default. */
  init?: Init;
  /** Base random seed for restarts (restart r runs with seed + r). */
  seed?: number;
  /** Independent restarts; the best result is returned. */
  restarts?: number;
  /** Cap on optimizer passes. */
  maxIter?: number;
  /** Treat `data` as a square dissimilarity matrix instead of points. */
  precomputed?: boolean;
  /** Point metric; invalid together with `precomputed`. */
  metric?: Metric;
}

export interface FitResult {
  medoids: number[];
  labels: number[];
  /** Average medoid silhouette of the returned clustering. */
  ams: number;
  /** Classical average silhouette width, or null if undefined. */
  asw: number | null;
  iterations: number;
  swaps: number;
  converged: boolean;
  /** Which restart won, and the seed it ran with. */
  restart: number;
  seed: number;
  wallTimeSec: number;
}

export interface MedoidSilhouette {
  perPoint: number[];
  average: number;
}

/** Failure reported by the core, with its exit code and message intact. */
export class MedsilError extends Error {
  readonly exitCode: number;

  constructor(message: string, exitCode: number) {
    super(message);
    this.name = "MedsilError";
    this.exitCode = exitCode;
  }
}

function commandLine(): string[] {
  const bin = process.env.MEDSIL_BIN;
  if (bin) return [bin];
  const py = process.env.MEDSIL_PYTHON;
  if (py) return [py, "-m", "medsil.cli"];
  return ["medsil"];
}

function coreMessage(stderr: string, code: number): string {
  const lines = stderr
    .split("\n")
    .map((ln) => ln.trim())
    .filter((ln) => ln.length > 0);
  const tagged = lines.filter((ln) => ln.startsWith("medsil: "));
  if (tagged.length > 0) return tagged[tagged.length - 1]!.slice(8);
  if (lines.length > 0) return lines[lines.length - 1]!;
  return `medsil exited with code ${code}`;
}

async function invoke(args: string[]): Promise<string> {
  const [cmd, ...prefix] = commandLine();
  try {
    const { stdout } = await execFileAsync(cmd!, [...prefix, ...args], {
      maxBuffer: 1 << 26,
    });
    return stdout;
  } catch (err) {
    const failure = err as { code?: number | string; stderr?: string };
    if (typeof failure.code === "number" && failure.stderr !== undefined) {
      throw new MedsilError(coreMessage(failure.stderr, failure.code),
                            failure.code);
    }
    throw new Error(`could not launch ${cmd}: ${String(err)}`);
  }
}

function checkTable(
  rows: ReadonlyArray<ReadonlyArray<number>>,
  what: string,
): void {
  if (!Array.isArray(rows) || rows.length === 0) {
    throw new Error(`${what} must be a non-empty array of rows`);
  }
  const width = rows[0]!.length;
  if (width === 0) {
    throw new Error(`${what} rows must not be empty`);
  }
  for (const row of rows) {
    if (!Array.isArray(row) || row.length !== width) {
      throw new Error(`${what} rows must all have length ${width}`);
    }
  }
}

function toCsv(rows: ReadonlyArray<ReadonlyArray<number>>): string {
  // Number -> string is shortest-round-trip in JS, and the core parses
  // floats with full round-trip fidelity, so values cross losslessly.
  return rows.map((row) => row.join(",")).join("\n") + "\n";
}

async function withInputFile<T>(
  rows: ReadonlyArray<ReadonlyArray<number>>,
  body: (path: string) => Promise<T>,
): Promise<T> {
  const dir = await mkdtemp(join(tmpdir(), "medsil-"));
  try {
    const path = join(dir, "input.csv");
    await writeFile(path, toCsv(rows), "utf8");
    return await body(path);
  } finally {
    await rm(dir, { recursive: true, force: true });
  }
}

/**
 * Cluster points or a precomputed dissimilarity matrix.
 *
 * Mirrors `medsil run`: the returned fields are exactly the `best` block
 * of the CLI report.
 */
export async function fit(
  data: ReadonlyArray<ReadonlyArray<number>>,
  options: FitOptions,
): Promise<FitResult> {
  checkTable(data, "data");
  if (options.precomputed && data.length !== data[0]!.length) {
    throw new Error(
      `precomputed dissimilarity matrix must be square, got ` +
        `${data.length}x${data[0]!.length}`,
    );
  }
  return withInputFile(data, async (path) => {
    const args = ["run", "--input", path, "--k", String(options.k)];
    if (options.precomputed) args.push("--precomputed");
    if (options.metric !== undefined) args.push("--metric", options.metric);
    if (options.algo !== undefined) args.push("--algo", options.algo);
    if (options.init !== undefined) args.push("--init", options.init);
    if (options.seed !== undefined) args.push("--seed", String(options.seed));
    if (options.restarts !== undefined) {
      args.push("--restarts", String(options.restarts));
    }
    if (options.maxIter !== undefined) {
      args.push("--max-iter", String(options.maxIter));
    }
    const report = JSON.parse(await invoke(args));
    const best = report.best;
    return {
      medoids: best.medoids,
      labels: best.labels,
      ams: best.ams,
      asw: best.asw,
      iterations: best.iterations,
      swaps: best.swaps,
      converged: best.converged,
      restart: best.restart,
      seed: best.seed,
      wallTimeSec: best.wall_time_sec,
    };
  });
}

/**
 * Score a fixed medoid set on a square dissimilarity matrix.
 *
 * Mirrors `medsil eval`: per-point medoid silhouettes plus their average.
 */
export async function medoidSilhouette(
  diss: ReadonlyArray<ReadonlyArray<number>>,
  medoids: ReadonlyArray<number>,
): Promise<MedoidSilhouette> {
  checkTable(diss, "diss");
  if (diss.length !== diss[0]!.length) {
    throw new Error(
      `dissimilarity matrix must be square, got ` +
        `${diss.length}x${diss[0]!.length}`,
    );
  }
  if (medoids.length === 0) {
    throw new Error("medoids must be a non-empty array of point indices");
  }
  return withInputFile(diss, async (path) => {
    const args = [
      "eval",
      "--input",
      path,
      "--precomputed",
      "--medoids",
      medoids.join(","),
    ];
    const report = JSON.parse(await invoke(args));
    return { perPoint: report.per_point, average: report.average };
  });
}
