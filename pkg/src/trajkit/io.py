"""Dataset loaders, converters, and the toolkit's delimited file formats.

Canonical trajectory CSV: header ``traj_id,label,t,x,y``, one row per
waypoint, rows of a trajectory contiguous and time-ordered, ``t`` empty when
the source has no timestamps. UTF-8 with LF line endings. All other formats
convert into this one.
"""

from __future__ import annotations

import csv
import os
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DataFormatError
from .landmarks import LandmarkSet
from .model import Dataset, LabeledTrajectory, Trajectory

CANONICAL_HEADER = ["traj_id", "label", "t", "x", "y"]

# raw Geolife transportation-mode ids, before any label merging
GEOLIFE_MODE_IDS = {
    "walk": 0, "bike": 1, "bus": 2, "car": 3,
    "taxi": 4, "subway": 5, "railway": 6, "train": 7,
}


def fmt_float(x) -> str:
    """Shortest decimal string that round-trips the float64 value."""
    return repr(float(x))


def _parse_float(text, path, line_no, what):
    try:
        v = float(text)
    except ValueError:
        raise DataFormatError(f"bad {what} value {text!r}", path, line_no) from None
    if not np.isfinite(v):
        raise DataFormatError(f"non-finite {what} value {text!r}", path, line_no)
    return v


def _parse_utc(text, path, line_no, fmt="%Y-%m-%d %H:%M:%S"):
    try:
        return datetime.strptime(text, fmt).replace(tzinfo=timezone.utc).timestamp()
    except ValueError:
        raise DataFormatError(f"bad datetime {text!r}", path, line_no) from None


def write_canonical_csv(ds: Dataset, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(CANONICAL_HEADER) + "\n")
        for item in ds.items:
            traj = item.trajectory
            if "," in traj.id or "\n" in traj.id:
                raise ValueError(f"trajectory id {traj.id!r} not representable in canonical CSV")
            for i in range(len(traj)):
                t = "" if traj.t is None else fmt_float(traj.t[i])
                f.write(f"{traj.id},{item.label},{t},{fmt_float(traj.xy[i, 0])},{fmt_float(traj.xy[i, 1])}\n")


def load_canonical_csv(path, name=None) -> Dataset:
    items = []
    cur_id = None
    cur_label = None
    cur_rows = []
    seen_ids = set()

    def flush(line_no):
        if cur_id is None:
            return
        if cur_id in seen_ids:
            raise DataFormatError(f"trajectory id {cur_id!r} appears in non-contiguous blocks", path, line_no)
        seen_ids.add(cur_id)
        xy = np.array([(r[1], r[2]) for r in cur_rows])
        ts = [r[0] for r in cur_rows]
        has_t = [v is not None for v in ts]
        if any(has_t) != all(has_t):
            raise DataFormatError(f"trajectory {cur_id!r} mixes timestamped and bare waypoints", path, line_no)
        t = np.array(ts, dtype=np.float64) if all(has_t) else None
        if t is not None and np.any(np.diff(t) < 0):
            raise DataFormatError(f"trajectory {cur_id!r} rows are not time-ordered", path, line_no)
        items.append(LabeledTrajectory(Trajectory(id=cur_id, xy=xy, t=t), cur_label))

    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file", path) from None
        if [h.strip() for h in header] != CANONICAL_HEADER:
            raise DataFormatError(f"unexpected header {header!r}", path, 1)
        line_no = 1
        for row in reader:
            line_no += 1
            if not row:
                continue
            if len(row) != 5:
                raise DataFormatError(f"expected 5 fields, got {len(row)}", path, line_no)
            tid, label_s, t_s, x_s, y_s = row
            try:
                label = int(label_s)
            except ValueError:
                raise DataFormatError(f"bad label {label_s!r}", path, line_no) from None
            t = None if t_s == "" else _parse_float(t_s, path, line_no, "t")
            x = _parse_float(x_s, path, line_no, "x")
            y = _parse_float(y_s, path, line_no, "y")
            if tid != cur_id:
                flush(line_no)
                cur_id, cur_label, cur_rows = tid, label, []
            elif label != cur_label:
                raise DataFormatError(f"trajectory {tid!r} changes label mid-block", path, line_no)
            cur_rows.append((t, x, y))
        flush(line_no + 1)
    if not items:
        raise DataFormatError("no data rows", path)
    return Dataset.from_items(items, name=name or Path(path).stem)


def load_plt_file(path, traj_id=None) -> Trajectory:
    """One Geolife .plt file -> one trajectory (x=longitude, y=latitude)."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        lines = f.readlines()
    if len(lines) <= 6:
        raise DataFormatError("no records after the 6 header lines", path)
    for line_no, line in enumerate(lines[6:], start=7):
        line = line.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) != 7:
            raise DataFormatError(f"expected 7 fields, got {len(fields)}", path, line_no)
        lat = _parse_float(fields[0], path, line_no, "latitude")
        lon = _parse_float(fields[1], path, line_no, "longitude")
        t = _parse_utc(f"{fields[5]} {fields[6]}", path, line_no)
        rows.append((t, lon, lat))
    if not rows:
        raise DataFormatError("no records", path)
    rows.sort(key=lambda r: r[0])
    xy = np.array([(r[1], r[2]) for r in rows])
    t = np.array([r[0] for r in rows])
    return Trajectory(id=traj_id or Path(path).stem, xy=xy, t=t)


def load_tdrive_file(path, traj_id=None) -> Trajectory:
    """One T-drive taxi log -> one (long) trajectory (x=longitude, y=latitude)."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 4:
                raise DataFormatError(f"expected 4 fields, got {len(fields)}", path, line_no)
            t = _parse_utc(fields[1], path, line_no)
            lon = _parse_float(fields[2], path, line_no, "longitude")
            lat = _parse_float(fields[3], path, line_no, "latitude")
            rows.append((t, lon, lat))
    if not rows:
        raise DataFormatError("empty file", path)
    rows.sort(key=lambda r: r[0])
    xy = np.array([(r[1], r[2]) for r in rows])
    t = np.array([r[0] for r in rows])
    return Trajectory(id=traj_id or Path(path).stem, xy=xy, t=t)


def _collect_files(path, suffix):
    p = Path(path)
    if p.is_dir():
        files = sorted(p.rglob(f"*{suffix}"))
        return files
    return [p]


def load_dataset(path, format, name=None, label=0) -> Dataset:
    """Load trajectories into a Dataset.

    ``canonical-csv`` reads a labeled dataset from one file. ``geolife-plt``
    and ``tdrive-txt`` accept a file or a directory tree of files; every
    trajectory gets the supplied ``label`` (converters assign real labels).
    """
    if format == "canonical-csv":
        return load_canonical_csv(path, name=name)
    if format == "geolife-plt":
        files = _collect_files(path, ".plt")
        if not files:
            raise DataFormatError("no .plt files found", path)
        items = [LabeledTrajectory(load_plt_file(f), label) for f in files]
        return Dataset.from_items(items, name=name or Path(path).stem)
    if format == "tdrive-txt":
        files = _collect_files(path, ".txt")
        if not files:
            raise DataFormatError("no .txt files found", path)
        items = [LabeledTrajectory(load_tdrive_file(f), label) for f in files]
        return Dataset.from_items(items, name=name or Path(path).stem)
    raise ValueError(f"unknown dataset format {format!r}")


def load_geolife_pairs(data_root, users, name=None) -> Dataset:
    """Geolife user-vs-user dataset: label = position of the user directory
    in ``users`` (e.g. users=('015', '044') -> labels 0 and 1)."""
    items = []
    for label, user in enumerate(users):
        traj_dir = Path(data_root) / user / "Trajectory"
        if not traj_dir.is_dir():
            raise DataFormatError(f"no Trajectory directory for user {user!r}", traj_dir)
        for f in sorted(traj_dir.glob("*.plt")):
            items.append(LabeledTrajectory(load_plt_file(f, traj_id=f"{user}_{f.stem}"), label))
    if not items:
        raise DataFormatError("no .plt files found", data_root)
    return Dataset.from_items(items, name=name or "geolife-pairs")


def load_tdrive_pairs(data_root, taxi_ids, name=None) -> Dataset:
    """T-drive taxi-vs-taxi dataset: one log file per taxi id, labels by
    position in ``taxi_ids``."""
    items = []
    root = Path(data_root)
    for label, taxi in enumerate(taxi_ids):
        f = root / f"{taxi}.txt"
        if not f.is_file():
            raise DataFormatError(f"no log file for taxi {taxi!r}", f)
        items.append(LabeledTrajectory(load_tdrive_file(f, traj_id=str(taxi)), label))
    return Dataset.from_items(items, name=name or "tdrive-pairs")


def load_gotrack(directory, name="carbus") -> Dataset:
    """UCI 'GPS Trajectories' (go_track) dump -> car/bus dataset.

    Expects ``go_track_tracks.csv`` and ``go_track_points.csv`` in the
    directory. Labels: car -> 0, bus -> 1. Trajectory ids are the track ids.
    """
    d = Path(directory)
    tracks_path = d / "go_track_tracks.csv"
    points_path = d / "go_track_points.csv"
    for p in (tracks_path, points_path):
        if not p.is_file():
            raise DataFormatError("missing go_track file", p)
    labels_by_track = {}
    with open(tracks_path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        for line_no, row in enumerate(reader, start=2):
            try:
                track_id = row["id"].strip()
                car_or_bus = int(float(row["car_or_bus"]))
            except (KeyError, ValueError, TypeError):
                raise DataFormatError("bad track row", tracks_path, line_no) from None
            if car_or_bus not in (1, 2):
                raise DataFormatError(f"car_or_bus must be 1 or 2, got {car_or_bus}", tracks_path, line_no)
            labels_by_track[track_id] = 0 if car_or_bus == 1 else 1
    points_by_track = {}
    with open(points_path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        for line_no, row in enumerate(reader, start=2):
            try:
                track_id = row["track_id"].strip()
                lat = _parse_float(row["latitude"], points_path, line_no, "latitude")
                lon = _parse_float(row["longitude"], points_path, line_no, "longitude")
                time_s = row["time"].strip()
            except KeyError:
                raise DataFormatError("bad point row", points_path, line_no) from None
            fmt = "%Y-%m-%d %H:%M:%S.%f" if "." in time_s else "%Y-%m-%d %H:%M:%S"
            t = _parse_utc(time_s, points_path, line_no, fmt)
            points_by_track.setdefault(track_id, []).append((t, lon, lat))
    items = []
    for track_id in sorted(points_by_track, key=lambda s: (len(s), s)):
        if track_id not in labels_by_track:
            continue
        rows = sorted(points_by_track[track_id], key=lambda r: r[0])
        xy = np.array([(r[1], r[2]) for r in rows])
        t = np.array([r[0] for r in rows])
        items.append(LabeledTrajectory(Trajectory(id=track_id, xy=xy, t=t), labels_by_track[track_id]))
    if not items:
        raise DataFormatError("no labeled tracks with points", directory)
    return Dataset.from_items(items, name=name)


def _parse_labels_txt(path):
    intervals = []
    with open(path, "r", encoding="utf-8") as f:
        lines = f.readlines()
    for line_no, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataFormatError(f"expected 3 tab-separated fields, got {len(fields)}", path, line_no)
        start = _parse_utc(fields[0], path, line_no, "%Y/%m/%d %H:%M:%S")
        end = _parse_utc(fields[1], path, line_no, "%Y/%m/%d %H:%M:%S")
        mode = fields[2].strip().lower()
        if mode in GEOLIFE_MODE_IDS:
            intervals.append((start, end, GEOLIFE_MODE_IDS[mode]))
    return intervals


def load_geolife_modes(data_root, name="geolife-modes") -> Dataset:
    """Transportation-mode dataset from a Geolife ``Data`` directory.

    Users with a labels.txt contribute one trajectory per labeled time
    interval: the user's GPS records whose timestamps fall inside the
    interval. Labels are the raw mode ids of GEOLIFE_MODE_IDS; merging
    (car+taxi etc.) is an experiment-level step.
    """
    root = Path(data_root)
    items = []
    for user_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        labels_path = user_dir / "labels.txt"
        if not labels_path.is_file():
            continue
        intervals = _parse_labels_txt(labels_path)
        if not intervals:
            continue
        records = []
        for f in sorted((user_dir / "Trajectory").glob("*.plt")):
            traj = load_plt_file(f)
            records.append(np.column_stack([traj.t, traj.xy]))
        if not records:
            continue
        recs = np.concatenate(records, axis=0)
        recs = recs[np.argsort(recs[:, 0], kind="stable")]
        times = recs[:, 0]
        for k, (start, end, mode) in enumerate(intervals):
            lo = np.searchsorted(times, start, side="left")
            hi = np.searchsorted(times, end, side="right")
            if hi - lo < 1:
                continue
            items.append(LabeledTrajectory(
                Trajectory(id=f"{user_dir.name}_{k}", xy=recs[lo:hi, 1:3], t=times[lo:hi]),
                mode,
            ))
    if not items:
        raise DataFormatError("no labeled intervals with GPS records", data_root)
    return Dataset.from_items(items, name=name)


def write_landmarks_csv(landmarks: LandmarkSet, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# provenance: {landmarks.provenance}\n")
        f.write("qx,qy\n")
        for i in range(len(landmarks)):
            f.write(f"{fmt_float(landmarks.xy[i, 0])},{fmt_float(landmarks.xy[i, 1])}\n")


def load_landmarks_csv(path) -> LandmarkSet:
    provenance = "user"
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        line_no = 0
        for line in f:
            line_no += 1
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "provenance:" in line:
                    provenance = line.split("provenance:", 1)[1].strip()
                continue
            if line == "qx,qy":
                continue
            fields = line.split(",")
            if len(fields) != 2:
                raise DataFormatError(f"expected 2 fields, got {len(fields)}", path, line_no)
            rows.append((_parse_float(fields[0], path, line_no, "qx"),
                         _parse_float(fields[1], path, line_no, "qy")))
    if not rows:
        raise DataFormatError("no landmarks", path)
    return LandmarkSet(xy=np.array(rows), provenance=provenance)


def write_feature_matrix_csv(matrix, path):
    """Matrix CSV: header ``traj_id,label,f0..f{d-1}``."""
    d = matrix.X.shape[1]
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("traj_id,label," + ",".join(f"f{j}" for j in range(d)) + "\n")
        for i, tid in enumerate(matrix.ids):
            values = ",".join(fmt_float(v) for v in matrix.X[i])
            f.write(f"{tid},{int(matrix.y[i])},{values}\n")


def write_distance_matrix_csv(ids, D, path):
    """Square distance matrix CSV with trajectory ids as header row/column."""
    D = np.asarray(D)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("," + ",".join(ids) + "\n")
        for i, tid in enumerate(ids):
            f.write(tid + "," + ",".join(fmt_float(v) for v in D[i]) + "\n")
