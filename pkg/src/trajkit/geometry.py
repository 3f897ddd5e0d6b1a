"""Point-to-polyline projections and local frames.

Every feature map and several distances reduce to "closest point of a
polygonal curve to a query point", so one projection kernel serves the
scalar ops and the batched helpers; results are bitwise identical either
way because they run the same elementwise formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Trajectory

# nearest-point candidates whose distances differ by less than this relative
# amount are treated as exact ties, resolved to the earliest curve position
TIE_REL_TOL = 1e-12


@dataclass(frozen=True)
class NearestPoint:
    point: np.ndarray
    segment_index: int
    param: float
    distance: float


@dataclass(frozen=True)
class LocalFrame:
    tangent: np.ndarray
    normal: np.ndarray
    at_endpoint: bool


def _project(qx, qy, ax, ay, bx, by):
    """Clamped projection of (qx, qy) onto segment (a, b); elementwise, so it
    accepts scalars or broadcastable arrays. Zero-length segments collapse to
    their start point."""
    ux = bx - ax
    uy = by - ay
    l2 = ux * ux + uy * uy
    with np.errstate(invalid="ignore", divide="ignore"):
        t = ((qx - ax) * ux + (qy - ay) * uy) / l2
    t = np.where(l2 > 0.0, t, 0.0)
    t = np.clip(t, 0.0, 1.0)
    # at the clamped boundary return b itself: a + 1.0*(b-a) need not round
    # back to b, and identity properties (d(x,x)=0) require exact endpoints
    px = np.where(t == 1.0, bx, ax + t * ux)
    py = np.where(t == 1.0, by, ay + t * uy)
    dx = qx - px
    dy = qy - py
    return t, px, py, np.sqrt(dx * dx + dy * dy)


def nearest_on_segment(q, a, b) -> NearestPoint:
    """Closest point of segment [a, b] to q, with the clamped parameter."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a[0] == b[0] and a[1] == b[1]:
        raise ValueError("degenerate segment: a == b")
    q = np.asarray(q, dtype=np.float64)
    t, px, py, d = _project(q[0], q[1], a[0], a[1], b[0], b[1])
    return NearestPoint(point=np.array([float(px), float(py)]), segment_index=0,
                        param=float(t), distance=float(d))


def _segment_arrays(traj: Trajectory):
    xy = traj.xy
    return xy[:-1, 0], xy[:-1, 1], xy[1:, 0], xy[1:, 1]


def project_points(points, traj: Trajectory):
    """Project each row of ``points`` onto every segment of ``traj`` and pick,
    per point, the global minimizer with first-position tie-breaking.

    Returns (px, py, seg, t, dist) arrays, one entry per query point.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    xy = traj.xy
    if xy.shape[0] == 1:
        dx = pts[:, 0] - xy[0, 0]
        dy = pts[:, 1] - xy[0, 1]
        d = np.sqrt(dx * dx + dy * dy)
        zeros = np.zeros(len(pts))
        return (np.full(len(pts), xy[0, 0]), np.full(len(pts), xy[0, 1]),
                np.zeros(len(pts), dtype=np.intp), zeros, d)
    ax, ay, bx, by = _segment_arrays(traj)
    qx = pts[:, 0][:, None]
    qy = pts[:, 1][:, None]
    t, px, py, d = _project(qx, qy, ax[None, :], ay[None, :], bx[None, :], by[None, :])
    dmin = d.min(axis=1)
    # ties within TIE_REL_TOL relative difference resolve to the earliest
    # segment; within one segment the projection is unique
    tie = (d - dmin[:, None]) <= TIE_REL_TOL * d
    seg = np.argmax(tie, axis=1)
    rows = np.arange(len(pts))
    return px[rows, seg], py[rows, seg], seg.astype(np.intp), t[rows, seg], dmin


def polyline_distances(points, traj: Trajectory) -> np.ndarray:
    """Distance from each query point to the polygonal curve of ``traj``."""
    return project_points(points, traj)[4]


def nearest_on_trajectory(q, traj: Trajectory) -> NearestPoint:
    """Global nearest point of the curve to q.

    Distance ties (relative difference below TIE_REL_TOL) are broken by the
    earliest position along the curve: smallest segment index, then smallest
    parameter. A single-waypoint trajectory returns that waypoint.
    """
    px, py, seg, t, d = project_points(np.asarray(q, dtype=np.float64).reshape(1, 2), traj)
    return NearestPoint(point=np.array([float(px[0]), float(py[0])]),
                        segment_index=int(seg[0]), param=float(t[0]), distance=float(d[0]))


def _unit(v):
    n = np.sqrt(v[0] * v[0] + v[1] * v[1])
    return v / n


def _rot90(v):
    # +90 degrees counterclockwise
    return np.array([-v[1], v[0]])


def _segment_dir(traj, i):
    return _unit(traj.xy[i + 1] - traj.xy[i])


def frame_at(traj: Trajectory, nearest: NearestPoint) -> LocalFrame:
    """Tangent/normal frame of the curve at a nearest-point location.

    Interior of a segment: tangent along the segment. Interior vertex:
    tangent is the normalized sum of the adjacent unit directions (angle
    bisector), falling back to the earlier segment when the sum vanishes.
    Curve endpoints take the adjacent segment's frame and are flagged.
    The normal is always the tangent rotated +90 degrees counterclockwise.
    """
    m = len(traj) - 1
    if m < 1:
        raise ValueError("frame_at needs a trajectory with at least one segment")
    seg, s = nearest.segment_index, nearest.param
    if (seg == 0 and s == 0.0) or (seg == m - 1 and s == 1.0):
        tangent = _segment_dir(traj, 0 if seg == 0 else m - 1)
        return LocalFrame(tangent=tangent, normal=_rot90(tangent), at_endpoint=True)
    if s == 1.0 or (s == 0.0 and seg > 0):
        left = seg if s == 1.0 else seg - 1
        u1 = _segment_dir(traj, left)
        u2 = _segment_dir(traj, left + 1)
        summed = u1 + u2
        norm = np.sqrt(summed[0] ** 2 + summed[1] ** 2)
        tangent = summed / norm if norm > 1e-12 else u1
        return LocalFrame(tangent=tangent, normal=_rot90(tangent), at_endpoint=False)
    tangent = _segment_dir(traj, seg)
    return LocalFrame(tangent=tangent, normal=_rot90(tangent), at_endpoint=False)
