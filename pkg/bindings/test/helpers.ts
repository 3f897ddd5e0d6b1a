import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { toCanonicalCsv } from "../src/csv.js";
import type { Dataset, TrajectoryRecord, Waypoint } from "../src/csv.js";

/** Deterministic 32-bit PRNG, good enough for test fixtures. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randomDataset(n: number, seed: number, timed = true): Dataset {
  const rand = mulberry32(seed);
  const items: TrajectoryRecord[] = [];
  for (let i = 0; i < n; i++) {
    const count = 3 + Math.floor(rand() * 10);
    const points: Waypoint[] = [];
    let t = Math.floor(rand() * 100);
    for (let k = 0; k < count; k++) {
      points.push({
        t: timed ? t : null,
        x: (rand() - 0.5) * 10,
        y: (rand() - 0.5) * 10,
      });
      t += 1 + Math.floor(rand() * 5);
    }
    items.push({ id: `t${i}`, label: i % 2, points });
  }
  return { name: "rand", items };
}

/** Write a dataset to a fresh temp dir and return the CSV path. */
export function writeDataset(ds: Dataset): string {
  const dir = mkdtempSync(join(tmpdir(), "trajkit-test-"));
  const path = join(dir, `${ds.name}.csv`);
  writeFileSync(path, toCanonicalCsv(ds));
  return path;
}
