from __future__ import annotations

import json

import numpy as np
import pytest

from trajkit import (ResultTable, SpecValidationError, convert,
                     load_canonical_csv, load_manifest, load_spec,
                     preprocess_dataset, run, spec_from_dict, spec_to_dict,
                     sweep, write_canonical_csv, write_result_csv)
from trajkit.harness import KNOWN_KEYS, TRANSPORT_MERGE

from helpers import bundles_dataset


def _spec(**over):
    d = {"dataset": "data.csv"}
    d.update(over)
    return spec_from_dict(d)


def test_spec_defaults():
    s = _spec()
    assert s.format == "canonical-csv"
    assert s.name == "data"
    assert s.exclude_ids == ()
    assert s.merge_labels is None
    assert s.remove_stationary is True
    assert s.partition_by is None
    assert s.min_points == 10 and s.max_points is None
    assert s.trials == 50 and s.train_fraction == 0.7 and s.seed == 0
    p = s.pipeline
    assert p.featurization == "vq" and p.classifier == "rf"
    assert p.n_landmarks == 20 and p.landmark_strategy == "random"
    assert p.sigma == 1.0 and p.distance is None


def test_spec_sigma_defaults_by_dataset_name():
    assert _spec(name="tdrive").pipeline.sigma == 10.0
    assert _spec(name="characters").pipeline.sigma == 100.0
    assert _spec(name="carbus").pipeline.sigma == 1.0
    assert _spec(name="tdrive", sigma=2.5).pipeline.sigma == 2.5


def test_spec_named_merge_map():
    s = _spec(merge_labels="transportation-modes")
    assert s.merge_labels == tuple(sorted(TRANSPORT_MERGE.items()))
    assert dict(s.merge_labels)[4] == 3 and dict(s.merge_labels)[6] == 7


def test_spec_landmark_variants():
    assert _spec(landmarks="mistake_driven").pipeline.landmark_strategy == "mistake_driven"
    s = _spec(landmarks={"file": "q.csv"})
    assert s.pipeline.landmark_strategy == "user"
    assert s.landmarks_file == "q.csv"


def test_spec_accepts_matching_order():
    s = _spec(preprocess={"order": ["remove_stationary", "filter_length"]})
    assert s.remove_stationary is True
    s = _spec(merge_labels={"0": 0, "1": 0},
              preprocess={"partition": {"by": "gap"},
                          "order": ["merge_labels", "remove_stationary",
                                    "partition", "filter_length"]})
    assert s.partition_by == "gap" and s.partition_threshold == 1200.0


BAD_SPECS = [
    ({}, "dataset"),
    ({"dataset": "d", "bogus": 1}, "bogus"),
    ({"dataset": "d", "format": "parquet"}, "format"),
    ({"dataset": "d", "exclude_ids": "a"}, "exclude_ids"),
    ({"dataset": "d", "exclude_ids": [1]}, "exclude_ids"),
    ({"dataset": "d", "merge_labels": "nope"}, "merge_labels"),
    ({"dataset": "d", "merge_labels": {"a": 1}}, "merge_labels"),
    ({"dataset": "d", "merge_labels": [1, 2]}, "merge_labels"),
    ({"dataset": "d", "preprocess": {"bogus": 1}}, "preprocess.bogus"),
    ({"dataset": "d", "preprocess": {"partition": {"threshold": 5}}}, "preprocess.partition"),
    ({"dataset": "d", "preprocess": {"partition": {"by": "speed"}}}, "preprocess.partition"),
    ({"dataset": "d", "preprocess": {"partition": {"by": "gap", "x": 1}}}, "preprocess.partition.x"),
    ({"dataset": "d", "preprocess": {"partition": {"by": "gap", "threshold": True}}},
     "preprocess.partition.threshold"),
    ({"dataset": "d", "preprocess": {"partition": {"by": "gap", "threshold": 0}}},
     "preprocess.partition.threshold"),
    ({"dataset": "d", "preprocess": {"min_points": 0}}, "preprocess.min_points"),
    ({"dataset": "d", "preprocess": {"min_points": 10, "max_points": 5}}, "preprocess.max_points"),
    ({"dataset": "d", "preprocess": {"order": ["filter_length", "remove_stationary"]}},
     "preprocess.order"),
    ({"dataset": "d", "augment_copies": [1]}, "augment_copies"),
    ({"dataset": "d", "augment_copies": {"0": -1}}, "augment_copies"),
    ({"dataset": "d", "featurization": "raw"}, "featurization"),
    ({"dataset": "d", "distance": "euclid"}, "distance"),
    ({"dataset": "d", "landmarks": "best"}, "landmarks"),
    ({"dataset": "d", "landmarks": {"file": 3}}, "landmarks"),
    ({"dataset": "d", "landmarks": {"file": "q.csv", "x": 1}}, "landmarks"),
    ({"dataset": "d", "n_landmarks": 0}, "n_landmarks"),
    ({"dataset": "d", "eta": -1}, "eta"),
    ({"dataset": "d", "sigma": 0}, "sigma"),
    ({"dataset": "d", "classifier": "svm"}, "classifier"),
    ({"dataset": "d", "vote_base": "vote"}, "vote_base"),
    ({"dataset": "d", "voters": 2}, "voters"),
    ({"dataset": "d", "knn_k": 0}, "knn_k"),
    ({"dataset": "d", "gap_point": [1]}, "gap_point"),
    ({"dataset": "d", "lsh_circles": 0}, "lsh_circles"),
    ({"dataset": "d", "trials": 0}, "trials"),
    ({"dataset": "d", "train_fraction": 1.0}, "train_fraction"),
    ({"dataset": "d", "seed": True}, "seed"),
    ({"dataset": "d", "trials": 5.0}, "trials"),
]


@pytest.mark.parametrize("doc,field", BAD_SPECS, ids=[f for _, f in BAD_SPECS])
def test_spec_rejections_name_the_field(doc, field):
    with pytest.raises(SpecValidationError) as err:
        spec_from_dict(doc)
    assert field in str(err.value)


def test_spec_dict_round_trip():
    d = {
        "dataset": "some/dir", "format": "geolife-plt", "name": "geolife",
        "exclude_ids": ["a", "b"],
        "merge_labels": {"0": 0, "1": 0, "2": 1},
        "preprocess": {"remove_stationary": True, "min_points": 12,
                       "max_points": 300,
                       "partition": {"by": "duration", "threshold": 600}},
        "augment_copies": {"0": 2, "1": 4},
        "featurization": "vq_exp", "distance": None, "landmarks": "mistake_driven",
        "n_landmarks": 25, "best_of": 2, "eta": 3.5, "sigma": 7.0,
        "classifier": "vote", "vote_base": "dt", "voters": 3, "knn_k": 4,
        "n_estimators": 10, "max_depth": 6, "lr_iterations": 100,
        "lr_learning_rate": 0.1, "epsilon": 0.5, "gap_point": [1.0, 2.0],
        "lsh_circles": 8, "trials": 7, "train_fraction": 0.8, "seed": 42,
    }
    d.pop("distance")
    spec = spec_from_dict(d)
    again = spec_from_dict(spec_to_dict(spec))
    assert again == spec
    assert set(spec_to_dict(spec)) <= KNOWN_KEYS


def test_load_spec_rejects_bad_json(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text("{not json")
    with pytest.raises(SpecValidationError):
        load_spec(p)


def _write_bundles_csv(tmp_path, rng=None, counts=(8, 8), name="bund"):
    rng = rng or np.random.default_rng(0)
    ds = bundles_dataset(rng, counts=counts, name=name)
    path = tmp_path / f"{name}.csv"
    write_canonical_csv(ds, path)
    return path


def test_preprocess_exclude_and_merge(tmp_path):
    path = _write_bundles_csv(tmp_path, counts=(3, 3))
    spec = _spec(dataset=str(path), exclude_ids=["bund0_0"],
                 merge_labels={"0": 5, "1": 5})
    ds = preprocess_dataset(load_canonical_csv(path), spec)
    assert len(ds) == 5
    assert set(it.label for it in ds.items) == {5}
    assert "bund0_0" not in [it.trajectory.id for it in ds.items]


def test_preprocess_merge_must_cover_labels(tmp_path):
    path = _write_bundles_csv(tmp_path, counts=(2, 2))
    spec = _spec(dataset=str(path), merge_labels={"0": 0})
    with pytest.raises(SpecValidationError) as err:
        preprocess_dataset(load_canonical_csv(path), spec)
    assert "merge_labels" in str(err.value)


def test_preprocess_augment_is_deterministic(tmp_path):
    path = _write_bundles_csv(tmp_path, counts=(2, 2))
    spec = _spec(dataset=str(path), augment_copies={"0": 2, "1": 0}, seed=3)
    a = preprocess_dataset(load_canonical_csv(path), spec)
    b = preprocess_dataset(load_canonical_csv(path), spec)
    assert len(a) == 8
    ids = [it.trajectory.id for it in a.items]
    assert "bund0_0~n0" in ids and "bund0_0~n1" in ids
    for x, y in zip(a.items, b.items):
        assert x.trajectory.id == y.trajectory.id
        assert np.array_equal(x.trajectory.xy, y.trajectory.xy)


def test_run_writes_reproducible_outputs(tmp_path):
    path = _write_bundles_csv(tmp_path)
    spec = _spec(dataset=str(path), trials=4, n_landmarks=3,
                 classifier="dt", seed=11)
    out1 = tmp_path / "r1"
    out2 = tmp_path / "r2"
    t1 = run(spec, out_dir=out1)
    t2 = run(spec, out_dir=out2, max_workers=4)
    assert len(t1.errors) == 4
    assert t1.errors == t2.errors
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()
    assert (out1 / "manifest.json").read_bytes() == (out2 / "manifest.json").read_bytes()
    lines = (out1 / "results.csv").read_text().splitlines()
    assert lines[0] == "dataset,featurization,landmarks,classifier,trial,error"
    assert len(lines) == 1 + 4 + 1


def test_manifest_replay_reproduces_errors(tmp_path):
    path = _write_bundles_csv(tmp_path)
    spec = _spec(dataset=str(path), trials=3, n_landmarks=3,
                 classifier="dt", seed=5)
    out = tmp_path / "out"
    table = run(spec, out_dir=out)
    replayed = load_manifest(out / "manifest.json")
    assert replayed == spec
    assert run(replayed).errors == table.errors


def test_manifest_seed_field_overrides_spec(tmp_path):
    path = _write_bundles_csv(tmp_path)
    spec = _spec(dataset=str(path), trials=1, seed=5)
    out = tmp_path / "out"
    run(spec, out_dir=out)
    doc = json.loads((out / "manifest.json").read_text())
    doc["seed"] = 9
    (out / "manifest.json").write_text(json.dumps(doc))
    assert load_manifest(out / "manifest.json").seed == 9


def test_result_csv_exact_bytes(tmp_path):
    table = ResultTable("d", "vq", "random(2)", "dt",
                        errors=(0.0, 0.5), seconds=(1.0, 1.0))
    p = tmp_path / "results.csv"
    write_result_csv(table, p)
    assert p.read_text() == (
        "dataset,featurization,landmarks,classifier,trial,error\n"
        "d,vq,random(2),dt,0,0.0\n"
        "d,vq,random(2),dt,1,0.5\n"
        "d,vq,random(2),dt,0.25,0.25\n")


def test_sweep_outputs_and_singleton(tmp_path):
    path = _write_bundles_csv(tmp_path)
    spec = _spec(dataset=str(path), trials=2, n_landmarks=3,
                 classifier="dt", seed=7)
    out = tmp_path / "sw"
    tables = sweep(spec, "n_landmarks", [2, 4], out_dir=out)
    assert len(tables) == 2
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "parameter,value,dataset,featurization,landmarks,classifier,trial,error"
    assert len(lines) == 1 + 2 * (2 + 1)
    assert lines[1].startswith("n_landmarks,2,")
    doc = json.loads((out / "manifest.json").read_text())
    assert doc["sweep"] == {"parameter": "n_landmarks", "values": [2, 4]}

    single = sweep(spec, "n_landmarks", [4])
    direct = run(spec_from_dict({**spec_to_dict(spec), "n_landmarks": 4}))
    assert single[0].errors == direct.errors


def test_sweep_validation(tmp_path):
    spec = _spec(dataset="x.csv")
    with pytest.raises(SpecValidationError):
        sweep(spec, "sigma", [1, 2])
    with pytest.raises(SpecValidationError):
        sweep(spec, "n_landmarks", [])
    with pytest.raises(SpecValidationError):
        sweep(spec, "n_landmarks", [0])
    with pytest.raises(SpecValidationError):
        sweep(spec, "n_landmarks", [2.5])


PLT_HEADER = "Geolife trajectory\nWGS 84\nAltitude is in Feet\nReserved 3\n0,2,255,My Track,0,0,2,8421376\n0\n"


def _write_plt_tree(root, stems):
    d = root / "user" / "Trajectory"
    d.mkdir(parents=True)
    for i, stem in enumerate(stems):
        (d / f"{stem}.plt").write_text(
            PLT_HEADER
            + f"39.9847,116.3184,0,492,39744.12,2008-10-23,02:53:{4 + i:02d}\n"
            + f"39.9846,116.3185,0,492,39744.12,2008-10-23,02:53:{5 + i:02d}\n")
    return root


def test_convert_plt_directory(tmp_path, capsys):
    src = _write_plt_tree(tmp_path / "src", ["a1", "a2"])
    out = tmp_path / "out.csv"
    n = convert(src, "geolife-plt", out, label=1)
    assert n == 2
    ds = load_canonical_csv(out)
    assert len(ds) == 2
    assert set(it.label for it in ds.items) == {1}
    assert sorted(it.trajectory.id for it in ds.items) == ["a1", "a2"]


def test_convert_empty_directory_warns(tmp_path, capsys):
    src = tmp_path / "empty"
    src.mkdir()
    out = tmp_path / "out.csv"
    assert convert(src, "geolife-plt", out) == 0
    assert out.read_text() == "traj_id,label,t,x,y\n"
    assert "wrote 0 trajectories" in capsys.readouterr().err


def test_convert_rejects_canonical_source(tmp_path):
    with pytest.raises(SpecValidationError):
        convert(tmp_path, "canonical-csv", tmp_path / "o.csv")
