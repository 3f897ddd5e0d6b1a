from __future__ import annotations

import numpy as np
import pytest

from trajkit import (frame_at, nearest_on_segment, nearest_on_trajectory,
                     polyline_distances, project_points)

from helpers import random_trajectory, traj
from oracles import polyline_distance_sampled, segment_distance_sampled


def test_nearest_on_segment_perpendicular_foot():
    np_ = nearest_on_segment((0, 1), (-1, 0), (1, 0))
    assert np_.point.tolist() == [0.0, 0.0]
    assert np_.param == 0.5
    assert np_.distance == 1.0


def test_nearest_on_segment_clamps_to_endpoint():
    np_ = nearest_on_segment((3, 4), (0, 0), (1, 0))
    assert np_.point.tolist() == [1.0, 0.0]
    assert np_.distance == pytest.approx(np.sqrt(20), abs=1e-12)
    assert np_.distance == pytest.approx(
        segment_distance_sampled((3, 4), (0, 0), (1, 0)), abs=1e-5)


def test_nearest_on_segment_at_start():
    np_ = nearest_on_segment((0, 0), (0, 0), (1, 0))
    assert np_.distance == 0.0
    assert np_.param == 0.0


def test_nearest_on_segment_rejects_degenerate():
    with pytest.raises(ValueError):
        nearest_on_segment((0, 0), (1, 1), (1, 1))


def test_nearest_on_trajectory_on_curve():
    np_ = nearest_on_trajectory((0.5, 0.0), traj([(0, 0), (1, 0)]))
    assert np_.distance == 0.0
    assert np_.point.tolist() == [0.5, 0.0]


def test_nearest_on_trajectory_tie_takes_first_segment():
    np_ = nearest_on_trajectory((0, 2), traj([(-1, 1), (0, 0), (1, 1)]))
    assert np_.segment_index == 0


def test_nearest_on_trajectory_endpoint():
    np_ = nearest_on_trajectory((5, 5), traj([(0, 0), (1, 0)]))
    assert np_.point.tolist() == [1.0, 0.0]
    assert np_.segment_index == 0
    assert np_.param == 1.0


def test_nearest_on_trajectory_single_waypoint():
    np_ = nearest_on_trajectory((3, 4), traj([(0, 0)]))
    assert np_.distance == 5.0
    assert np_.point.tolist() == [0.0, 0.0]


def test_nearest_equals_min_over_segments_exactly():
    rng = np.random.default_rng(5)
    for i in range(50):
        tr = random_trajectory(rng, f"r{i}", n_lo=2, n_hi=10)
        q = rng.uniform(-6, 6, size=2)
        got = nearest_on_trajectory(q, tr).distance
        per_seg = min(
            nearest_on_segment(q, tr.xy[j], tr.xy[j + 1]).distance
            for j in range(len(tr) - 1))
        assert got == per_seg


def test_nearest_never_exceeds_waypoint_distances():
    rng = np.random.default_rng(6)
    for i in range(1000):
        tr = random_trajectory(rng, f"r{i}", n_lo=1, n_hi=8)
        q = rng.uniform(-6, 6, size=2)
        d = nearest_on_trajectory(q, tr).distance
        assert d <= np.min(np.hypot(tr.xy[:, 0] - q[0], tr.xy[:, 1] - q[1])) + 1e-12


def test_nearest_matches_dense_sampling_oracle():
    rng = np.random.default_rng(8)
    for i in range(100):
        tr = random_trajectory(rng, f"r{i}", n_lo=1, n_hi=6)
        q = rng.uniform(-6, 6, size=2)
        got = nearest_on_trajectory(q, tr).distance
        ref = polyline_distance_sampled(q, tr.xy)
        assert got <= ref + 1e-12
        assert got == pytest.approx(ref, abs=1e-3)


def test_project_points_batch_matches_scalar_loop():
    rng = np.random.default_rng(9)
    tr = random_trajectory(rng, "batch", n_lo=5, n_hi=10)
    pts = rng.uniform(-6, 6, size=(40, 2))
    px, py, seg, t, d = project_points(pts, tr)
    for k in range(len(pts)):
        one = nearest_on_trajectory(pts[k], tr)
        assert (px[k], py[k]) == (one.point[0], one.point[1])
        assert seg[k] == one.segment_index
        assert t[k] == one.param
        assert d[k] == one.distance


def test_polyline_distances_shape():
    tr = traj([(0, 0), (1, 0)])
    d = polyline_distances(np.array([[0.0, 1.0], [0.0, 2.0]]), tr)
    assert d.tolist() == [1.0, 2.0]


def test_frame_interior_axis_aligned():
    tr = traj([(0, 0), (1, 0)])
    fr = frame_at(tr, nearest_on_trajectory((0.5, 0.3), tr))
    assert fr.tangent.tolist() == [1.0, 0.0]
    assert fr.normal.tolist() == [0.0, 1.0]
    assert not fr.at_endpoint


def test_frame_normal_is_plus_90_rotation():
    tr = traj([(0, 0), (0, 1)])
    fr = frame_at(tr, nearest_on_trajectory((0.3, 0.5), tr))
    assert fr.tangent.tolist() == [0.0, 1.0]
    assert fr.normal.tolist() == [-1.0, 0.0]


def test_frame_vertex_bisector():
    tr = traj([(0, 0), (1, 0), (1, 1)])
    fr = frame_at(tr, nearest_on_trajectory((1.5, -0.5), tr))
    assert not fr.at_endpoint
    assert fr.tangent == pytest.approx(np.array([1, 1]) / np.sqrt(2), abs=1e-12)


def test_frame_endpoint_flagged():
    tr = traj([(0, 0), (1, 0)])
    fr = frame_at(tr, nearest_on_trajectory((3, 4), tr))
    assert fr.at_endpoint
    assert fr.tangent.tolist() == [1.0, 0.0]
    fr0 = frame_at(tr, nearest_on_trajectory((-2, 0.5), tr))
    assert fr0.at_endpoint


def test_frame_properties_on_random_inputs():
    rng = np.random.default_rng(10)
    for i in range(200):
        tr = random_trajectory(rng, f"r{i}", n_lo=2, n_hi=8)
        q = rng.uniform(-6, 6, size=2)
        fr = frame_at(tr, nearest_on_trajectory(q, tr))
        assert np.hypot(*fr.tangent) == pytest.approx(1.0, abs=1e-12)
        assert np.hypot(*fr.normal) == pytest.approx(1.0, abs=1e-12)
        assert abs(fr.tangent @ fr.normal) < 1e-12
        assert fr.normal[0] == -fr.tangent[1] and fr.normal[1] == fr.tangent[0]
