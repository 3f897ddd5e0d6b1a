"""Fixed-dimension feature vectors for trajectories.

Landmark features measure how close a curve passes to each of a set of fixed
planar points: plain distances (vq), Gaussian-localized distances (vq_exp),
and a signed variant (vq_sigma) that also encodes which side of the oriented
curve the landmark lies on. Physical features summarize motion (segment
length, velocity, acceleration, jerk). The "+" kinds concatenate a landmark
vector with the physical one.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import NearestPoint, frame_at, polyline_distances, project_points
from .model import Dataset, Trajectory, _frozen_array

LANDMARK_KINDS = ("vq", "vq_exp", "vq_sigma")
FEATURE_KINDS = LANDMARK_KINDS + ("endpoints", "physical", "vq_plus", "vq_sigma_plus")


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        object.__setattr__(self, "values", _frozen_array(self.values, (len(self.values),)))

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FeatureMatrix:
    """Featurized dataset: row i is trajectory ids[i] with label y[i]."""

    X: np.ndarray
    y: np.ndarray
    ids: tuple
    kind: str

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        X.flags.writeable = False
        y = np.ascontiguousarray(np.asarray(self.y, dtype=np.int64))
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "ids", tuple(self.ids))
        if X.ndim != 2:
            raise ValueError("feature matrix must be 2-d")
        if not (X.shape[0] == y.shape[0] == len(self.ids)):
            raise ValueError("rows, labels, and ids must align")

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def subset(self, indices) -> "FeatureMatrix":
        idx = np.asarray(indices)
        return FeatureMatrix(self.X[idx], self.y[idx],
                             tuple(self.ids[i] for i in idx), self.kind)


def _landmark_xy(Q):
    xy = Q.xy if hasattr(Q, "xy") else np.asarray(Q, dtype=np.float64)
    if xy.ndim != 2 or xy.shape[1] != 2 or xy.shape[0] < 1:
        raise ValueError("landmarks must be a nonempty sequence of planar points")
    return xy


def v_q(traj: Trajectory, q) -> float:
    """Distance from the point q to the curve (0 iff q lies on it)."""
    return float(polyline_distances(np.asarray(q, dtype=np.float64).reshape(1, 2), traj)[0])


def v_Q(traj: Trajectory, Q) -> FeatureVector:
    return FeatureVector(polyline_distances(_landmark_xy(Q), traj), "vq")


def v_Q_exp(traj: Trajectory, Q, eta: float) -> FeatureVector:
    """Gaussian-localized landmark features exp(-v_q^2 / eta^2), in (0, 1]."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    d = polyline_distances(_landmark_xy(Q), traj)
    return FeatureVector(np.exp(-(d * d) / (eta * eta)), "vq_exp")


def v_Q_sigma(traj: Trajectory, Q, sigma: float) -> FeatureVector:
    """Signed landmark features.

    For landmark q with nearest curve point p: at an interior p the value is
    <n_p, q-p> * exp(-|q-p|^2/sigma^2) / sigma, positive on the normal side
    of the oriented curve. At a curve endpoint the inner product is taken
    with the unit offset and rescaled by the l-infinity norm of q in the
    local (tangent, normal) frame, which keeps the field continuous when the
    nearest point slides off the end. q exactly on the curve gives 0.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if len(traj) < 2:
        raise ValueError("signed features need at least 2 waypoints")
    xy = _landmark_xy(Q)
    px, py, seg, s, _ = project_points(xy, traj)
    out = np.empty(xy.shape[0])
    for i in range(xy.shape[0]):
        dx = xy[i, 0] - px[i]
        dy = xy[i, 1] - py[i]
        dist = float(np.hypot(dx, dy))
        if dist == 0.0:
            out[i] = 0.0
            continue
        frame = frame_at(traj, NearestPoint(
            point=np.array([px[i], py[i]]), segment_index=int(seg[i]),
            param=float(s[i]), distance=dist))
        gauss = float(np.exp(-(dist * dist) / (sigma * sigma)))
        ndot = float(frame.normal[0] * dx + frame.normal[1] * dy)
        if frame.at_endpoint:
            tdot = float(frame.tangent[0] * dx + frame.tangent[1] * dy)
            linf = max(abs(tdot), abs(ndot))
            out[i] = (ndot / dist) * linf * gauss / sigma
        else:
            out[i] = ndot * gauss / sigma
    return FeatureVector(out, "vq_sigma")


def endpoints_feature(traj: Trajectory) -> FeatureVector:
    """(x_first, y_first, x_last, y_last); a single point is duplicated."""
    first = traj.xy[0]
    last = traj.xy[-1]
    return FeatureVector(np.array([first[0], first[1], last[0], last[1]]), "endpoints")


def physical_features(traj: Trajectory) -> FeatureVector:
    """Mean segment length, velocity, acceleration, and jerk.

    Velocities exist only on segments with positive duration; accelerations
    and jerks are trailing differences along those chains, divided by the
    later interval. A mean over an empty chain is 0.
    """
    if traj.t is None:
        raise ValueError("physical features need timestamps")
    if len(traj) < 2:
        raise ValueError("physical features need at least 2 waypoints")
    lengths = np.sqrt(np.sum(np.diff(traj.xy, axis=0) ** 2, axis=1))
    dt = np.diff(traj.t)
    valid = dt > 0
    vel = lengths[valid] / dt[valid]
    vel_dt = dt[valid]
    acc = np.diff(vel) / vel_dt[1:] if vel.size >= 2 else np.empty(0)
    acc_dt = vel_dt[1:]
    jerk = np.diff(acc) / acc_dt[1:] if acc.size >= 2 else np.empty(0)

    def mean0(a):
        return float(a.mean()) if a.size else 0.0

    return FeatureVector(
        np.array([mean0(lengths), mean0(vel), mean0(acc), mean0(jerk)]), "physical")


def combine_plus(geo: FeatureVector, phys: FeatureVector) -> FeatureVector:
    """Concatenate a landmark vector with the physical one (dim |Q|+4)."""
    if geo.kind not in ("vq", "vq_sigma"):
        raise ValueError(f"cannot extend kind {geo.kind!r} with physical features")
    if phys.kind != "physical":
        raise ValueError(f"expected a physical vector, got {phys.kind!r}")
    return FeatureVector(np.concatenate([geo.values, phys.values]), geo.kind + "_plus")


def featurize(traj: Trajectory, kind: str, Q=None, eta=None, sigma=None) -> FeatureVector:
    if kind == "vq":
        return v_Q(traj, Q)
    if kind == "vq_exp":
        return v_Q_exp(traj, Q, eta)
    if kind == "vq_sigma":
        return v_Q_sigma(traj, Q, sigma)
    if kind == "endpoints":
        return endpoints_feature(traj)
    if kind == "physical":
        return physical_features(traj)
    if kind == "vq_plus":
        return combine_plus(v_Q(traj, Q), physical_features(traj))
    if kind == "vq_sigma_plus":
        return combine_plus(v_Q_sigma(traj, Q, sigma), physical_features(traj))
    raise ValueError(f"unknown feature kind {kind!r}")


def featurize_dataset(ds: Dataset, kind: str, Q=None, eta=None, sigma=None,
                      max_workers=None) -> FeatureMatrix:
    """Featurize every trajectory; row order always matches dataset order."""

    def one(item):
        return featurize(item.trajectory, kind, Q=Q, eta=eta, sigma=sigma).values

    if max_workers is not None and max_workers > 1 and len(ds.items) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(one, ds.items))
    else:
        rows = [one(item) for item in ds.items]
    X = np.stack(rows) if rows else np.empty((0, 0))
    y = np.array([item.label for item in ds.items], dtype=np.int64)
    ids = tuple(item.trajectory.id for item in ds.items)
    return FeatureMatrix(X, y, ids, kind)
