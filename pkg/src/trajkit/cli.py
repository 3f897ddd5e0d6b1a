"""Command line interface.

Subcommands: convert, preprocess, featurize, run, sweep, plus landmarks,
distmatrix, and report. Exit codes: 0 on success, 2 when a spec or argument
fails validation, 3 on data errors (unreadable or malformed inputs).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, harness, io
from .distances import DistanceParams, d_Q, distance_matrix, random_circles
from .errors import DataFormatError, SpecValidationError, TrajkitError
from .features import FEATURE_KINDS, featurize_dataset
from .landmarks import best_of_k, compute_eta, random_landmarks


def _split_csv(text):
    return tuple(s for s in (part.strip() for part in (text or "").split(",")) if s)


def _dataset_eta(ds, explicit):
    """eta for standalone tools: the two-class mean rule when possible,
    otherwise the pooled per-axis spread. run() computes this per split."""
    if explicit is not None:
        return explicit
    present = sorted(set(it.label for it in ds.items))
    if len(present) == 2:
        return compute_eta(ds.by_label(present[0]), ds.by_label(present[1]))
    eta = float(ds.all_waypoints().std(axis=0).mean())
    return eta if eta > 0 else 1.0


def cmd_convert(args) -> int:
    n = harness.convert(args.input, args.format, args.out, label=args.label,
                        name=args.name, users=_split_csv(args.users) or None,
                        ids=_split_csv(args.ids) or None)
    print(f"wrote {n} trajectories to {args.out}")
    return 0


def cmd_preprocess(args) -> int:
    d = {"dataset": args.input, "preprocess": {
        "remove_stationary": not args.keep_stationary,
        "min_points": args.min_points,
    }}
    if args.max_points is not None:
        d["preprocess"]["max_points"] = args.max_points
    if args.partition:
        d["preprocess"]["partition"] = {"by": args.partition, "threshold": args.threshold}
    if args.exclude_ids:
        d["exclude_ids"] = list(_split_csv(args.exclude_ids))
    if args.merge_labels:
        d["merge_labels"] = args.merge_labels
    spec = harness.spec_from_dict(d)
    ds = harness.load_experiment_dataset(spec)
    out_ds = harness.preprocess_dataset(ds, spec)
    io.write_canonical_csv(out_ds, args.out)
    counts = {label: 0 for label in out_ds.labels}
    for it in out_ds.items:
        counts[it.label] += 1
    per_label = ", ".join(f"label {k}: {v}" for k, v in sorted(counts.items()))
    print(f"wrote {len(out_ds)} trajectories to {args.out} ({per_label})")
    return 0


def _landmarks_from_args(ds, args):
    if args.landmarks:
        return io.load_landmarks_csv(args.landmarks)
    if args.strategy == "mistake_driven":
        present = sorted(set(it.label for it in ds.items))
        if len(present) != 2:
            raise SpecValidationError("strategy", "mistake_driven needs exactly 2 classes")
        eta = _dataset_eta(ds, args.eta)
        return best_of_k(ds.by_label(present[0]), ds.by_label(present[1]),
                         args.n_landmarks, eta, k=args.best_of, seed=args.seed)
    return random_landmarks(ds, args.n_landmarks, args.seed)


def cmd_featurize(args) -> int:
    ds = io.load_canonical_csv(args.input)
    Q = None
    eta = args.eta
    if args.kind.startswith("vq"):
        Q = _landmarks_from_args(ds, args)
    if args.kind == "vq_exp":
        eta = _dataset_eta(ds, args.eta)
    M = featurize_dataset(ds, args.kind, Q=Q, eta=eta, sigma=args.sigma)
    io.write_feature_matrix_csv(M, args.out)
    print(f"wrote {len(M)}x{M.dim} {args.kind} matrix to {args.out}")
    return 0


def cmd_landmarks(args) -> int:
    ds = io.load_canonical_csv(args.input)
    args.landmarks = None
    Q = _landmarks_from_args(ds, args)
    io.write_landmarks_csv(Q, args.out)
    print(f"wrote {len(Q)} {Q.provenance} landmarks to {args.out}")
    return 0


def cmd_distmatrix(args) -> int:
    ds = io.load_canonical_csv(args.input)
    trajs = [it.trajectory for it in ds.items]
    ids = [t.id for t in trajs]
    if args.distance == "dq":
        Q = _landmarks_from_args(ds, args)
        eta = _dataset_eta(ds, args.eta) if args.kind == "vq_exp" else args.eta
        M = featurize_dataset(ds, args.kind, Q=Q, eta=eta, sigma=args.sigma)
        D = np.array([[d_Q(M.X[i], M.X[j]) for j in range(len(M))]
                      for i in range(len(M))])
    else:
        landmarks = None
        circles = ()
        if args.distance == "dq_pi":
            landmarks = _landmarks_from_args(ds, args)
        if args.distance == "lsh":
            present = sorted(set(it.label for it in ds.items))
            if len(present) != 2:
                raise SpecValidationError("distance", "lsh radius rule needs exactly 2 classes")
            circles = random_circles(ds.by_label(present[0]), ds.by_label(present[1]),
                                     args.circles, seed=args.seed)
        params = DistanceParams(epsilon=args.epsilon, gap_point=_parse_point(args.gap),
                                lsh_circles=circles, landmarks=landmarks)
        D = distance_matrix(trajs, args.distance, params, max_workers=args.threads)
    io.write_distance_matrix_csv(ids, D, args.out)
    print(f"wrote {len(ids)}x{len(ids)} {args.distance} matrix to {args.out}")
    return 0


def _parse_point(text):
    parts = _split_csv(text)
    if len(parts) != 2:
        raise SpecValidationError("gap", f"expected 'x,y', got {text!r}")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError:
        raise SpecValidationError("gap", f"expected numbers, got {text!r}") from None


def _load_spec_with_seed(args):
    spec = harness.load_spec(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    return spec


def cmd_run(args) -> int:
    spec = _load_spec_with_seed(args)
    out_dir = args.out_dir or (Path(args.spec).parent / f"{Path(args.spec).stem}_results")
    table = harness.run(spec, out_dir=out_dir, max_workers=args.threads)
    print(f"{table.dataset} {table.featurization} {table.landmarks} {table.classifier}: "
          f"mean error {table.mean:.4f} (std {table.std:.4f}, {len(table.errors)} trials)")
    print(f"results in {out_dir}")
    return 0


def cmd_sweep(args) -> int:
    spec = _load_spec_with_seed(args)
    try:
        values = [int(v) for v in _split_csv(args.values)]
    except ValueError:
        raise SpecValidationError("values", f"expected ints, got {args.values!r}") from None
    out_dir = args.out_dir or (Path(args.spec).parent / f"{Path(args.spec).stem}_sweep")
    tables = harness.sweep(spec, args.parameter, values, out_dir=out_dir,
                           max_workers=args.threads)
    for v, table in zip(values, tables):
        print(f"{args.parameter}={v}: mean error {table.mean:.4f} (std {table.std:.4f})")
    print(f"results in {out_dir}")
    return 0


def cmd_report(args) -> int:
    from .report import render_report
    written = render_report(args.results, args.out_dir)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trajkit",
                                     description="Trajectory featurization and classification toolkit")
    parser.add_argument("--version", action="version", version=f"trajkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert a source dataset to canonical CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--format", required=True,
                   choices=[f for f in harness.DATASET_FORMATS if f != "canonical-csv"])
    p.add_argument("--out", required=True)
    p.add_argument("--label", type=int, default=0,
                   help="label for formats without labels (default 0)")
    p.add_argument("--name", default=None)
    p.add_argument("--users", default=None,
                   help="geolife-plt: comma-separated user dirs, labeled by position")
    p.add_argument("--ids", default=None,
                   help="tdrive-txt: comma-separated taxi ids, labeled by position")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("preprocess", help="clean a canonical CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keep-stationary", action="store_true")
    p.add_argument("--partition", choices=["gap", "duration"], default=None)
    p.add_argument("--threshold", type=float, default=1200.0)
    p.add_argument("--min-points", type=int, default=10)
    p.add_argument("--max-points", type=int, default=None)
    p.add_argument("--exclude-ids", default=None)
    p.add_argument("--merge-labels", default=None,
                   help=f"named merge map, one of {tuple(harness.MERGE_MAPS)}")
    p.set_defaults(func=cmd_preprocess)

    def landmark_args(p, with_file=True):
        if with_file:
            p.add_argument("--landmarks", default=None, help="landmark CSV to reuse")
        p.add_argument("--strategy", choices=["random", "mistake_driven"], default="random")
        p.add_argument("--n-landmarks", type=int, default=20)
        p.add_argument("--best-of", type=int, default=3)
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("featurize", help="write a feature matrix CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", required=True, choices=list(FEATURE_KINDS))
    p.add_argument("--out", required=True)
    p.add_argument("--sigma", type=float, default=1.0)
    landmark_args(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("landmarks", help="generate a landmark CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    landmark_args(p, with_file=False)
    p.set_defaults(func=cmd_landmarks)

    p = sub.add_parser("distmatrix", help="write a pairwise distance matrix CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--distance", required=True, choices=list(harness.TRAJ_DISTANCES))
    p.add_argument("--out", required=True)
    p.add_argument("--kind", default="vq", choices=["vq", "vq_exp", "vq_sigma"],
                   help="feature kind for distance=dq")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.02)
    p.add_argument("--gap", default="0,0", help="ERP gap point 'x,y'")
    p.add_argument("--circles", type=int, default=20, help="LSH circle count")
    p.add_argument("--threads", type=int, default=None)
    landmark_args(p)
    p.set_defaults(func=cmd_distmatrix)

    p = sub.add_parser("run", help="run an experiment spec")
    p.add_argument("--spec", required=True, help="experiment spec JSON")
    p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a spec over a range of one parameter")
    p.add_argument("--spec", required=True)
    p.add_argument("--parameter", required=True, choices=list(harness.SWEEPABLE))
    p.add_argument("--values", required=True, help="comma-separated ints")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="render figures and a summary from result CSVs")
    p.add_argument("--results", nargs="+", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecValidationError as e:
        print(f"spec error: {e}", file=sys.stderr)
        return 2
    except DataFormatError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except TrajkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"invalid arguments: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
