"""Config-driven experiment harness.

An experiment spec is a flat JSON object naming a dataset, preprocessing,
featurization, landmark strategy, classifier, and the evaluation protocol
(trials, train fraction, master seed). ``run`` executes it and writes a
per-trial result CSV plus a JSON manifest that reproduces the run exactly;
``sweep`` repeats a run over one parameter and emits a long-form CSV.

Preprocessing order is fixed: merge labels, remove stationary waypoints,
partition, filter by length. A spec may state the order explicitly only to
confirm it; any other order is rejected.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .classify import CLASSIFIER_NAMES, Pipeline, ResultTable, evaluate
from .errors import SpecValidationError
from .features import FEATURE_KINDS
from .io import (fmt_float, load_dataset, load_geolife_modes, load_geolife_pairs,
                 load_gotrack, load_landmarks_csv, load_tdrive_pairs,
                 write_canonical_csv)
from .model import (Dataset, LabeledTrajectory, filter_length, partition_by_duration,
                    partition_by_gap, remove_stationary, simulate_noisy_copies)

DATASET_FORMATS = ("canonical-csv", "geolife-plt", "tdrive-txt",
                   "carbus-gotrack", "geolife-modes")

# raw mode ids -> 5 classes: walk, bike, bus, car(+taxi), train(+railway+subway)
TRANSPORT_MERGE = {0: 0, 1: 1, 2: 2, 3: 3, 4: 3, 5: 7, 6: 7, 7: 7}
MERGE_MAPS = {"transportation-modes": TRANSPORT_MERGE}

# per-dataset defaults for the signed-feature scale
SIGMA_DEFAULTS = {"carbus": 1.0, "geolife": 1.0, "geolife-modes": 1.0,
                  "tdrive": 10.0, "characters": 100.0, "two-persons": 100.0}

PREPROCESS_ORDER = ("merge_labels", "remove_stationary", "partition", "filter_length")
SWEEPABLE = ("n_landmarks", "best_of", "n_estimators", "voters")
TRAJ_DISTANCES = ("dq", "dq_pi", "hausdorff", "frechet", "dtw", "lcss", "edr",
                  "erp", "sspd", "lsh")

RESULT_HEADER = "dataset,featurization,landmarks,classifier,trial,error"


@dataclass(frozen=True)
class ExperimentSpec:
    dataset: str
    format: str
    name: str
    exclude_ids: tuple
    merge_labels: tuple | None  # sorted ((raw, merged), ...) or None
    remove_stationary: bool
    partition_by: str | None
    partition_threshold: float
    min_points: int
    max_points: int | None
    augment_copies: tuple | None  # sorted ((label, copies), ...) or None
    landmarks_file: str | None
    pipeline: Pipeline
    trials: int
    train_fraction: float
    seed: int


def _field(d, key, default, types, check=None, what=None, field=None):
    v = d.get(key, default)
    field = field or key
    if types is not None:
        # JSON true/false must not satisfy int-typed fields
        bad_bool = isinstance(v, bool) and types is not bool
        if bad_bool or not isinstance(v, types):
            raise SpecValidationError(field, f"expected {what or types}, got {v!r}")
    if check is not None and not check(v):
        raise SpecValidationError(field, f"invalid value {v!r}")
    return v


KNOWN_KEYS = {
    "dataset", "format", "name", "exclude_ids", "merge_labels", "preprocess",
    "augment_copies", "featurization", "distance", "landmarks", "n_landmarks",
    "best_of", "eta", "sigma", "classifier", "vote_base", "voters", "knn_k",
    "n_estimators", "max_depth", "lr_iterations", "lr_learning_rate",
    "epsilon", "gap_point", "lsh_circles", "trials", "train_fraction", "seed",
}


def spec_from_dict(d: dict) -> ExperimentSpec:
    """Validate a parsed spec JSON object. Errors name the offending field."""
    if not isinstance(d, dict):
        raise SpecValidationError("spec", "top level must be a JSON object")
    for key in d:
        if key not in KNOWN_KEYS:
            raise SpecValidationError(key, "unknown field")

    dataset = _field(d, "dataset", None, str, what="a path string")
    if dataset is None:
        raise SpecValidationError("dataset", "required")
    format = _field(d, "format", "canonical-csv", str,
                    check=lambda v: v in DATASET_FORMATS,
                    what=f"one of {DATASET_FORMATS}")
    name = _field(d, "name", Path(dataset).stem, str)

    exclude = d.get("exclude_ids", [])
    if not (isinstance(exclude, list) and all(isinstance(x, str) for x in exclude)):
        raise SpecValidationError("exclude_ids", "expected a list of id strings")

    merge = d.get("merge_labels")
    if merge is not None:
        if isinstance(merge, str):
            if merge not in MERGE_MAPS:
                raise SpecValidationError("merge_labels", f"unknown named map {merge!r}")
            merge_items = tuple(sorted(MERGE_MAPS[merge].items()))
        elif isinstance(merge, dict):
            try:
                merge_items = tuple(sorted((int(k), int(v)) for k, v in merge.items()))
            except (TypeError, ValueError):
                raise SpecValidationError("merge_labels", "keys and values must be integers") from None
        else:
            raise SpecValidationError("merge_labels", "expected a map or a named map")
    else:
        merge_items = None

    pp = d.get("preprocess", {})
    if not isinstance(pp, dict):
        raise SpecValidationError("preprocess", "expected an object")
    for key in pp:
        if key not in ("order", "remove_stationary", "partition", "min_points", "max_points"):
            raise SpecValidationError(f"preprocess.{key}", "unknown field")
    stationary = _field(pp, "remove_stationary", True, bool,
                        field="preprocess.remove_stationary")
    part = pp.get("partition")
    if part is not None:
        if not isinstance(part, dict) or "by" not in part:
            raise SpecValidationError("preprocess.partition", "expected {by, threshold}")
        if part["by"] not in ("gap", "duration"):
            raise SpecValidationError("preprocess.partition", f"unknown mode {part['by']!r}")
        for key in part:
            if key not in ("by", "threshold"):
                raise SpecValidationError(f"preprocess.partition.{key}", "unknown field")
    partition_by = part["by"] if part else None
    raw_threshold = part.get("threshold", 1200.0) if part else 1200.0
    if isinstance(raw_threshold, bool) or not isinstance(raw_threshold, (int, float)) or raw_threshold <= 0:
        raise SpecValidationError("preprocess.partition.threshold", "must be a positive number")
    threshold = float(raw_threshold)
    min_points = _field(pp, "min_points", 10, int, check=lambda v: v >= 1,
                        field="preprocess.min_points")
    max_points = pp.get("max_points")
    if max_points is not None and (not isinstance(max_points, int) or max_points < min_points):
        raise SpecValidationError("preprocess.max_points", f"must be an int >= min_points ({min_points})")
    order = pp.get("order")
    if order is not None:
        enabled = ["merge_labels"] if merge_items is not None else []
        if stationary:
            enabled.append("remove_stationary")
        if partition_by:
            enabled.append("partition")
        enabled.append("filter_length")
        if list(order) != enabled:
            raise SpecValidationError("preprocess.order",
                                      f"order is fixed; expected {enabled}, got {list(order)}")

    augment = d.get("augment_copies")
    if augment is not None:
        if not isinstance(augment, dict):
            raise SpecValidationError("augment_copies", "expected a map label -> copies")
        try:
            augment_items = tuple(sorted((int(k), int(v)) for k, v in augment.items()))
        except (TypeError, ValueError):
            raise SpecValidationError("augment_copies", "keys and values must be integers") from None
        if any(c < 0 for _, c in augment_items):
            raise SpecValidationError("augment_copies", "copy counts must be >= 0")
    else:
        augment_items = None

    featurization = _field(d, "featurization", "vq", str,
                           check=lambda v: v in FEATURE_KINDS,
                           what=f"one of {FEATURE_KINDS}")
    distance = d.get("distance")
    if distance is not None and distance not in TRAJ_DISTANCES:
        raise SpecValidationError("distance", f"expected one of {TRAJ_DISTANCES}")

    landmarks = d.get("landmarks", "random")
    landmarks_file = None
    if isinstance(landmarks, dict):
        if set(landmarks) != {"file"} or not isinstance(landmarks["file"], str):
            raise SpecValidationError("landmarks", 'expected "random", "mistake_driven", or {"file": path}')
        strategy = "user"
        landmarks_file = landmarks["file"]
    elif landmarks in ("random", "mistake_driven"):
        strategy = landmarks
    else:
        raise SpecValidationError("landmarks", 'expected "random", "mistake_driven", or {"file": path}')

    n_landmarks = _field(d, "n_landmarks", 20, int, check=lambda v: v >= 1)
    best_of = _field(d, "best_of", 3, int, check=lambda v: v >= 1)
    eta = d.get("eta")
    if eta is not None and not (isinstance(eta, (int, float)) and eta > 0):
        raise SpecValidationError("eta", "must be positive when given")
    sigma = d.get("sigma")
    if sigma is None:
        sigma = SIGMA_DEFAULTS.get(name, 1.0)
    elif not (isinstance(sigma, (int, float)) and sigma > 0):
        raise SpecValidationError("sigma", "must be positive when given")

    classifier = _field(d, "classifier", "rf", str,
                        check=lambda v: v in CLASSIFIER_NAMES,
                        what=f"one of {CLASSIFIER_NAMES}")
    vote_base = _field(d, "vote_base", "rf", str,
                       check=lambda v: v in CLASSIFIER_NAMES and v != "vote")
    voters = _field(d, "voters", 5, int, check=lambda v: v >= 1 and v % 2 == 1,
                    what="an odd positive int")
    knn_k = _field(d, "knn_k", 5, int, check=lambda v: v >= 1)
    n_estimators = _field(d, "n_estimators", 50, int, check=lambda v: v >= 1)
    max_depth = d.get("max_depth")
    if max_depth is not None and (not isinstance(max_depth, int) or max_depth < 0):
        raise SpecValidationError("max_depth", "must be a nonnegative int or null")
    lr_iterations = _field(d, "lr_iterations", 500, int, check=lambda v: v >= 1)
    lr_learning_rate = _field(d, "lr_learning_rate", 0.5, (int, float),
                              check=lambda v: v > 0)
    epsilon = _field(d, "epsilon", 0.02, (int, float), check=lambda v: v > 0)
    gap_point = d.get("gap_point", [0.0, 0.0])
    if not (isinstance(gap_point, (list, tuple)) and len(gap_point) == 2
            and all(isinstance(v, (int, float)) for v in gap_point)):
        raise SpecValidationError("gap_point", "expected [x, y]")
    lsh_circles = _field(d, "lsh_circles", 20, int, check=lambda v: v >= 1)

    trials = _field(d, "trials", 50, int, check=lambda v: v >= 1)
    train_fraction = _field(d, "train_fraction", 0.7, (int, float),
                            check=lambda v: 0 < v < 1)
    seed = _field(d, "seed", 0, int, what="an integer")

    pipeline = Pipeline(
        featurization=featurization, classifier=classifier, distance=distance,
        n_landmarks=n_landmarks, landmark_strategy=strategy,
        eta=float(eta) if eta is not None else None, sigma=float(sigma),
        best_of=best_of, voters=voters, vote_base=vote_base, knn_k=knn_k,
        n_estimators=n_estimators, max_depth=max_depth,
        lr_iterations=lr_iterations, lr_learning_rate=float(lr_learning_rate),
        epsilon=float(epsilon), gap_point=(float(gap_point[0]), float(gap_point[1])),
        lsh_circles=lsh_circles)
    return ExperimentSpec(
        dataset=dataset, format=format, name=name, exclude_ids=tuple(exclude),
        merge_labels=merge_items, remove_stationary=stationary,
        partition_by=partition_by, partition_threshold=threshold,
        min_points=min_points, max_points=max_points,
        augment_copies=augment_items, landmarks_file=landmarks_file,
        pipeline=pipeline, trials=trials, train_fraction=float(train_fraction),
        seed=seed)


def spec_to_dict(spec: ExperimentSpec) -> dict:
    """Inverse of spec_from_dict, with every field resolved explicitly."""
    p = spec.pipeline
    d = {
        "dataset": spec.dataset,
        "format": spec.format,
        "name": spec.name,
        "exclude_ids": list(spec.exclude_ids),
        "preprocess": {
            "remove_stationary": spec.remove_stationary,
            "min_points": spec.min_points,
        },
        "featurization": p.featurization,
        "landmarks": ({"file": spec.landmarks_file} if spec.landmarks_file
                      else p.landmark_strategy),
        "n_landmarks": p.n_landmarks,
        "best_of": p.best_of,
        "sigma": p.sigma,
        "classifier": p.classifier,
        "vote_base": p.vote_base,
        "voters": p.voters,
        "knn_k": p.knn_k,
        "n_estimators": p.n_estimators,
        "lr_iterations": p.lr_iterations,
        "lr_learning_rate": p.lr_learning_rate,
        "epsilon": p.epsilon,
        "gap_point": list(p.gap_point),
        "lsh_circles": p.lsh_circles,
        "trials": spec.trials,
        "train_fraction": spec.train_fraction,
        "seed": spec.seed,
    }
    if spec.merge_labels is not None:
        d["merge_labels"] = {str(k): v for k, v in spec.merge_labels}
    if spec.partition_by:
        d["preprocess"]["partition"] = {"by": spec.partition_by,
                                        "threshold": spec.partition_threshold}
    if spec.max_points is not None:
        d["preprocess"]["max_points"] = spec.max_points
    if spec.augment_copies is not None:
        d["augment_copies"] = {str(k): v for k, v in spec.augment_copies}
    if p.distance is not None:
        d["distance"] = p.distance
    if p.eta is not None:
        d["eta"] = p.eta
    if p.max_depth is not None:
        d["max_depth"] = p.max_depth
    return d


def load_spec(path) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as e:
            raise SpecValidationError("spec", f"not valid JSON ({e})") from None
    return spec_from_dict(d)


def load_experiment_dataset(spec: ExperimentSpec) -> Dataset:
    if spec.format == "carbus-gotrack":
        return load_gotrack(spec.dataset, name=spec.name)
    if spec.format == "geolife-modes":
        return load_geolife_modes(spec.dataset, name=spec.name)
    return load_dataset(spec.dataset, spec.format, name=spec.name)


def preprocess_dataset(ds: Dataset, spec: ExperimentSpec) -> Dataset:
    """Apply the fixed pipeline: merge labels, drop stationary waypoints,
    partition, filter by length (then any configured noise augmentation)."""
    drop = set(spec.exclude_ids)
    items = [it for it in ds.items if it.trajectory.id not in drop]
    if spec.merge_labels is not None:
        mm = dict(spec.merge_labels)
        raw = set(it.label for it in items)
        missing = raw - set(mm)
        if missing:
            raise SpecValidationError(
                "merge_labels", f"map does not cover raw labels {sorted(missing)}")
        items = [LabeledTrajectory(it.trajectory, mm[it.label]) for it in items]
    if spec.remove_stationary:
        items = [LabeledTrajectory(remove_stationary(it.trajectory), it.label)
                 for it in items]
    if spec.partition_by is not None:
        split = partition_by_gap if spec.partition_by == "gap" else partition_by_duration
        items = [LabeledTrajectory(part, it.label)
                 for it in items for part in split(it.trajectory, spec.partition_threshold)]
    out = Dataset.from_items(items, name=spec.name)
    out = filter_length(out, spec.min_points, spec.max_points)
    if spec.augment_copies is not None:
        aug_ss, _ = np.random.SeedSequence(spec.seed).spawn(2)
        out = simulate_noisy_copies(out, dict(spec.augment_copies), aug_ss)
    return out


def _effective_pipeline(spec: ExperimentSpec) -> Pipeline:
    if spec.landmarks_file is None:
        return spec.pipeline
    return replace(spec.pipeline, user_landmarks=load_landmarks_csv(spec.landmarks_file))


def _eval_seed(spec: ExperimentSpec):
    if spec.augment_copies is not None:
        _, eval_ss = np.random.SeedSequence(spec.seed).spawn(2)
        return eval_ss
    return spec.seed


def run(spec: ExperimentSpec, out_dir=None, max_workers=None) -> ResultTable:
    """Load, preprocess, evaluate; optionally write results.csv and
    manifest.json into out_dir. Byte-identical at any worker count."""
    ds = preprocess_dataset(load_experiment_dataset(spec), spec)
    table = evaluate(ds, _effective_pipeline(spec), trials=spec.trials,
                     train_fraction=spec.train_fraction, seed=_eval_seed(spec),
                     max_workers=max_workers)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_result_csv(table, out / "results.csv")
        write_manifest(spec, out / "manifest.json")
    return table


def sweep(spec: ExperimentSpec, parameter: str, values, out_dir=None,
          max_workers=None) -> list:
    """One run per value of a sweepable parameter, all from the same master
    seed; emits one long-form CSV when out_dir is given."""
    if parameter not in SWEEPABLE:
        raise SpecValidationError("parameter", f"not sweepable; expected one of {SWEEPABLE}")
    values = list(values)
    if not values:
        raise SpecValidationError("values", "need at least one value")
    tables = []
    for v in values:
        if not isinstance(v, int) or v < 1:
            raise SpecValidationError("values", f"expected positive ints, got {v!r}")
        run_spec = replace(spec, pipeline=replace(spec.pipeline, **{parameter: v}))
        tables.append(run(run_spec, out_dir=None, max_workers=max_workers))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_sweep_csv(parameter, values, tables, out / "sweep.csv")
        write_manifest(spec, out / "manifest.json",
                       extra={"sweep": {"parameter": parameter, "values": values}})
    return tables


def convert(input_path, format: str, output_path, label: int = 0, name=None,
            users=None, ids=None) -> int:
    """Convert a source dataset into the canonical CSV; returns how many
    trajectories were written. An empty source directory writes a header-only
    file with a warning instead of failing."""
    if format not in DATASET_FORMATS or format == "canonical-csv":
        allowed = tuple(f for f in DATASET_FORMATS if f != "canonical-csv")
        raise SpecValidationError("format", f"expected one of {allowed}")
    p = Path(input_path)
    if format in ("geolife-plt", "tdrive-txt") and p.is_dir():
        suffix = ".plt" if format == "geolife-plt" else ".txt"
        if not any(p.rglob(f"*{suffix}")):
            with open(output_path, "w", encoding="utf-8", newline="\n") as f:
                f.write("traj_id,label,t,x,y\n")
            print(f"warning: no *{suffix} files under {input_path}; wrote 0 trajectories",
                  file=sys.stderr)
            return 0
    if format == "carbus-gotrack":
        ds = load_gotrack(input_path, name=name or "carbus")
    elif format == "geolife-modes":
        ds = load_geolife_modes(input_path, name=name or "geolife-modes")
    elif format == "geolife-plt" and users:
        ds = load_geolife_pairs(input_path, users, name=name)
    elif format == "tdrive-txt" and ids:
        ds = load_tdrive_pairs(input_path, ids, name=name)
    else:
        ds = load_dataset(input_path, format, name=name, label=label)
    write_canonical_csv(ds, output_path)
    return len(ds)


def write_result_csv(table: ResultTable, path):
    """Per-trial rows, then one summary row carrying mean and std in the
    trial and error column positions."""
    head = f"{table.dataset},{table.featurization},{table.landmarks},{table.classifier}"
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(RESULT_HEADER + "\n")
        for i, err in enumerate(table.errors):
            f.write(f"{head},{i},{fmt_float(err)}\n")
        f.write(f"{head},{fmt_float(table.mean)},{fmt_float(table.std)}\n")


def write_sweep_csv(parameter: str, values, tables, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("parameter,value," + RESULT_HEADER + "\n")
        for v, table in zip(values, tables):
            head = (f"{parameter},{v},{table.dataset},{table.featurization},"
                    f"{table.landmarks},{table.classifier}")
            for i, err in enumerate(table.errors):
                f.write(f"{head},{i},{fmt_float(err)}\n")
            f.write(f"{head},{fmt_float(table.mean)},{fmt_float(table.std)}\n")


def write_manifest(spec: ExperimentSpec, path, extra=None):
    doc = {"spec": spec_to_dict(spec), "seed": spec.seed, "version": __version__}
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def load_manifest(path) -> ExperimentSpec:
    """Rebuild the spec recorded in a run manifest (the reproduction path)."""
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if not isinstance(doc, dict) or "spec" not in doc:
        raise SpecValidationError("manifest", "missing spec object")
    spec = spec_from_dict(doc["spec"])
    if "seed" in doc and doc["seed"] != spec.seed:
        spec = replace(spec, seed=int(doc["seed"]))
    return spec
