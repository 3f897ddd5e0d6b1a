import { DataError } from "./errors.js";

export interface Waypoint {
  /** Seconds, or null when the source has no timestamps. */
  t: number | null;
  x: number;
  y: number;
}

export interface TrajectoryRecord {
  id: string;
  label: number;
  points: Waypoint[];
}

export interface Dataset {
  name: string;
  items: TrajectoryRecord[];
}

/** Dense row-major matrix of landmark features, one row per trajectory. */
export interface FeatureMatrix {
  ids: string[];
  labels: number[];
  kind: string;
  rows: number;
  cols: number;
  values: Float64Array;
}

/** Dense row-major square matrix of pairwise trajectory distances. */
export interface DistanceMatrix {
  ids: string[];
  size: number;
  values: Float64Array;
}

export interface Landmarks {
  /** How the set was produced: "random", "mistake_driven", or "user". */
  strategy: string;
  /** Flat [x0, y0, x1, y1, ...] landmark coordinates. */
  points: Float64Array;
}

const CANONICAL_HEADER = "traj_id,label,t,x,y";

function lines(text: string): string[] {
  const out = text.split("\n");
  if (out.length > 0 && out[out.length - 1] === "") {
    out.pop();
  }
  return out;
}

function parseNumber(field: string, what: string, lineNo: number): number {
  const v = Number(field);
  if (field.trim() === "" || !Number.isFinite(v)) {
    throw new DataError(`bad ${what} ${JSON.stringify(field)} at line ${lineNo}`);
  }
  return v;
}

export function parseCanonicalCsv(text: string, name = ""): Dataset {
  const rows = lines(text);
  if (rows.length === 0 || rows[0] !== CANONICAL_HEADER) {
    throw new DataError(`expected header ${CANONICAL_HEADER}`);
  }
  const items: TrajectoryRecord[] = [];
  let current: TrajectoryRecord | null = null;
  for (let i = 1; i < rows.length; i++) {
    const fields = rows[i].split(",");
    if (fields.length !== 5) {
      throw new DataError(`expected 5 fields, got ${fields.length} at line ${i + 1}`);
    }
    const [id, label, t, x, y] = fields;
    const point: Waypoint = {
      t: t === "" ? null : parseNumber(t, "t", i + 1),
      x: parseNumber(x, "x", i + 1),
      y: parseNumber(y, "y", i + 1),
    };
    if (current === null || current.id !== id) {
      current = { id, label: parseNumber(label, "label", i + 1), points: [] };
      items.push(current);
    }
    current.points.push(point);
  }
  return { name, items };
}

export function toCanonicalCsv(ds: Dataset): string {
  const out: string[] = [CANONICAL_HEADER];
  for (const item of ds.items) {
    for (const p of item.points) {
      out.push(`${item.id},${item.label},${p.t ?? ""},${p.x},${p.y}`);
    }
  }
  return out.join("\n") + "\n";
}

export function parseFeatureMatrixCsv(text: string, kind: string): FeatureMatrix {
  const rows = lines(text);
  if (rows.length === 0 || !rows[0].startsWith("traj_id,label,")) {
    throw new DataError("expected header traj_id,label,f0..");
  }
  const cols = rows[0].split(",").length - 2;
  const n = rows.length - 1;
  const ids: string[] = [];
  const labels: number[] = [];
  const values = new Float64Array(n * cols);
  for (let i = 0; i < n; i++) {
    const fields = rows[i + 1].split(",");
    if (fields.length !== cols + 2) {
      throw new DataError(`expected ${cols + 2} fields, got ${fields.length} at line ${i + 2}`);
    }
    ids.push(fields[0]);
    labels.push(parseNumber(fields[1], "label", i + 2));
    for (let j = 0; j < cols; j++) {
      values[i * cols + j] = parseNumber(fields[j + 2], `f${j}`, i + 2);
    }
  }
  return { ids, labels, kind, rows: n, cols, values };
}

export function parseDistanceMatrixCsv(text: string): DistanceMatrix {
  const rows = lines(text);
  if (rows.length === 0 || !rows[0].startsWith(",")) {
    throw new DataError("expected an id header row starting with a comma");
  }
  const ids = rows[0].split(",").slice(1);
  const size = ids.length;
  if (rows.length - 1 !== size) {
    throw new DataError(`expected ${size} rows, got ${rows.length - 1}`);
  }
  const values = new Float64Array(size * size);
  for (let i = 0; i < size; i++) {
    const fields = rows[i + 1].split(",");
    if (fields.length !== size + 1 || fields[0] !== ids[i]) {
      throw new DataError(`row ${i + 2} does not match the id header`);
    }
    for (let j = 0; j < size; j++) {
      values[i * size + j] = parseNumber(fields[j + 1], "distance", i + 2);
    }
  }
  return { ids, size, values };
}

export function parseLandmarksCsv(text: string): Landmarks {
  let strategy = "user";
  const coords: number[] = [];
  const rows = lines(text);
  for (let i = 0; i < rows.length; i++) {
    const line = rows[i].trim();
    if (line === "" || line === "qx,qy") {
      continue;
    }
    if (line.startsWith("#")) {
      const m = line.match(/provenance:\s*(\S+)/);
      if (m) {
        strategy = m[1];
      }
      continue;
    }
    const fields = line.split(",");
    if (fields.length !== 2) {
      throw new DataError(`expected 2 fields, got ${fields.length} at line ${i + 1}`);
    }
    coords.push(parseNumber(fields[0], "qx", i + 1), parseNumber(fields[1], "qy", i + 1));
  }
  if (coords.length === 0) {
    throw new DataError("no landmarks");
  }
  return { strategy, points: Float64Array.from(coords) };
}
