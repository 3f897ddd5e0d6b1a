import { spawnSync } from "node:child_process";

import { DataError, SpecError } from "./errors.js";

/** The trajkit executable to drive; override with the TRAJKIT_CLI env var. */
export function cliPath(): string {
  return process.env.TRAJKIT_CLI ?? "trajkit";
}

/**
 * Run one trajkit subcommand to completion and return its stdout.
 *
 * Exit code 2 surfaces as SpecError and 3 as DataError, with the CLI's
 * stderr message intact.
 */
export function runCli(args: string[]): string {
  const proc = spawnSync(cliPath(), args, {
    encoding: "utf-8",
    maxBuffer: 1 << 28,
  });
  if (proc.error) {
    throw new DataError(`failed to launch ${cliPath()}: ${proc.error.message}`);
  }
  if (proc.status === 0) {
    return proc.stdout;
  }
  const message = (proc.stderr ?? "").trim() || `trajkit exited with ${proc.status}`;
  if (proc.status === 2) {
    throw new SpecError(message);
  }
  throw new DataError(message);
}
