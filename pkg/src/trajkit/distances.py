"""Trajectory distances: the landmark pair (d_Q on feature vectors, d_Q_pi on
nearest points) and classical baselines (Hausdorff, discrete Frechet, DTW,
LCSS, EDR, ERP, SSPD) plus binary LSH sketches compared by Hamming count.

Conventions fixed here: DTW sums unsquared Euclidean distances; Hausdorff and
SSPD measure waypoints of one trajectory against the other's polyline; ERP's
gap point defaults to the origin; LCSS and EDR are normalized into [0, 1].
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .features import FeatureVector
from .geometry import polyline_distances, project_points
from .landmarks import LandmarkSet, compute_eta
from .model import Dataset, Trajectory

PAIR_DISTANCE_NAMES = ("dq_pi", "hausdorff", "frechet", "dtw", "lcss", "edr",
                       "erp", "sspd", "lsh")


@dataclass(frozen=True)
class DistanceParams:
    """Knobs for the parametric distances; unused fields are ignored."""

    epsilon: float = 0.02
    gap_point: tuple = (0.0, 0.0)
    lsh_circles: tuple = ()
    landmarks: LandmarkSet | None = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        for _, r in self.lsh_circles:
            if r <= 0:
                raise ValueError("circle radii must be positive")


@dataclass(frozen=True)
class Sketch:
    bits: tuple

    def __len__(self) -> int:
        return len(self.bits)


def _values(u):
    return u.values if isinstance(u, FeatureVector) else np.asarray(u, dtype=np.float64)


def d_Q(u, v) -> float:
    """Scaled Euclidean distance |u-v|/sqrt(n) between landmark feature
    vectors. A pseudometric on curves: distinct curves can collide."""
    uv, vv = _values(u), _values(v)
    if uv.shape != vv.shape:
        raise ValueError(f"dimension mismatch: {uv.shape} vs {vv.shape}")
    if isinstance(u, FeatureVector) and isinstance(v, FeatureVector) and u.kind != v.kind:
        raise ValueError(f"kind mismatch: {u.kind!r} vs {v.kind!r}")
    return float(np.linalg.norm(uv - vv) / np.sqrt(uv.shape[0]))


def d_Q_pi(a: Trajectory, b: Trajectory, Q) -> float:
    """Mean distance between the per-landmark nearest points on the two
    curves (ties resolved to the earliest point along each curve)."""
    xy = Q.xy if isinstance(Q, LandmarkSet) else np.asarray(Q, dtype=np.float64)
    pax, pay, _, _, _ = project_points(xy, a)
    pbx, pby, _, _, _ = project_points(xy, b)
    return float(np.mean(np.hypot(pax - pbx, pay - pby)))


def _point_matrix(A, B):
    diff = A[:, None, :] - B[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def hausdorff(a: Trajectory, b: Trajectory) -> float:
    """Max over both directions of the farthest waypoint-to-polyline distance."""
    d_ab = float(np.max(polyline_distances(a.xy, b)))
    d_ba = float(np.max(polyline_distances(b.xy, a)))
    return max(d_ab, d_ba)


def sspd(a: Trajectory, b: Trajectory) -> float:
    """Symmetrized mean waypoint-to-polyline distance."""
    d_ab = float(np.mean(polyline_distances(a.xy, b)))
    d_ba = float(np.mean(polyline_distances(b.xy, a)))
    return 0.5 * (d_ab + d_ba)


def discrete_frechet(a: Trajectory, b: Trajectory) -> float:
    """Smallest over monotone waypoint couplings of the largest paired
    distance, by the standard dynamic program."""
    D = _point_matrix(a.xy, b.xy).tolist()
    n, m = len(a), len(b)
    row = [0.0] * m
    row[0] = D[0][0]
    for j in range(1, m):
        row[j] = max(D[0][j], row[j - 1])
    for i in range(1, n):
        Di = D[i]
        new = [0.0] * m
        new[0] = max(Di[0], row[0])
        for j in range(1, m):
            best = row[j]
            if row[j - 1] < best:
                best = row[j - 1]
            if new[j - 1] < best:
                best = new[j - 1]
            new[j] = Di[j] if Di[j] > best else best
        row = new
    return row[m - 1]


def dtw(a: Trajectory, b: Trajectory) -> float:
    """Minimal sum of Euclidean point distances over a monotone alignment."""
    D = _point_matrix(a.xy, b.xy).tolist()
    n, m = len(a), len(b)
    row = [0.0] * m
    row[0] = D[0][0]
    for j in range(1, m):
        row[j] = row[j - 1] + D[0][j]
    for i in range(1, n):
        Di = D[i]
        new = [0.0] * m
        new[0] = row[0] + Di[0]
        for j in range(1, m):
            best = row[j]
            if row[j - 1] < best:
                best = row[j - 1]
            if new[j - 1] < best:
                best = new[j - 1]
            new[j] = Di[j] + best
        row = new
    return row[m - 1]


def lcss_dist(a: Trajectory, b: Trajectory, epsilon: float) -> float:
    """1 - LCSS/min(|a|,|b|); waypoints match within Euclidean epsilon."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    match = (_point_matrix(a.xy, b.xy) <= epsilon).tolist()
    n, m = len(a), len(b)
    row = [0] * (m + 1)
    for i in range(1, n + 1):
        mi = match[i - 1]
        new = [0] * (m + 1)
        for j in range(1, m + 1):
            if mi[j - 1]:
                new[j] = row[j - 1] + 1
            else:
                new[j] = row[j] if row[j] >= new[j - 1] else new[j - 1]
        row = new
    return 1.0 - row[m] / min(n, m)


def edr_dist(a: Trajectory, b: Trajectory, epsilon: float) -> float:
    """Edit distance (match 0 within epsilon else 1, indel 1) over max(|a|,|b|)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    match = (_point_matrix(a.xy, b.xy) <= epsilon).tolist()
    n, m = len(a), len(b)
    row = list(range(m + 1))
    for i in range(1, n + 1):
        mi = match[i - 1]
        new = [i] + [0] * m
        for j in range(1, m + 1):
            sub = row[j - 1] + (0 if mi[j - 1] else 1)
            ins = new[j - 1] + 1
            dele = row[j] + 1
            best = sub
            if ins < best:
                best = ins
            if dele < best:
                best = dele
            new[j] = best
        row = new
    return row[m] / max(n, m)


def erp_dist(a: Trajectory, b: Trajectory, gap_point=(0.0, 0.0)) -> float:
    """Edit distance with real penalty against the fixed gap point g: match
    costs |p-q|, indel costs |p-g|. A metric for fixed g."""
    g = np.asarray(gap_point, dtype=np.float64)
    D = _point_matrix(a.xy, b.xy).tolist()
    ga = np.sqrt(np.sum((a.xy - g) ** 2, axis=1)).tolist()
    gb = np.sqrt(np.sum((b.xy - g) ** 2, axis=1)).tolist()
    n, m = len(a), len(b)
    row = [0.0] * (m + 1)
    for j in range(1, m + 1):
        row[j] = row[j - 1] + gb[j - 1]
    for i in range(1, n + 1):
        Di = D[i - 1]
        new = [row[0] + ga[i - 1]] + [0.0] * m
        for j in range(1, m + 1):
            best = row[j - 1] + Di[j - 1]
            dele = row[j] + ga[i - 1]
            ins = new[j - 1] + gb[j - 1]
            if dele < best:
                best = dele
            if ins < best:
                best = ins
            new[j] = best
        row = new
    return row[m]


def random_circles(train1: Dataset, train2: Dataset, k: int = 20, seed=None) -> tuple:
    """k random circles for sketching: centers uniform over the bounding box
    of the pooled training waypoints, shared radius |r1 - r2| (the distance
    between the two classes' waypoint means)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    radius = compute_eta(train1, train2)
    pooled = np.concatenate([train1.all_waypoints(), train2.all_waypoints()], axis=0)
    lo = pooled.min(axis=0)
    hi = pooled.max(axis=0)
    rng = np.random.default_rng(seed)
    centers = rng.uniform(lo, hi, size=(k, 2))
    return tuple(((float(c[0]), float(c[1])), radius) for c in centers)


def lsh_sketch(traj: Trajectory, circles) -> Sketch:
    """Bit j is 1 iff the curve comes within radius j of center j."""
    if len(circles) < 1:
        raise ValueError("need at least one circle")
    centers = np.array([c for c, _ in circles], dtype=np.float64)
    radii = np.array([r for _, r in circles], dtype=np.float64)
    d = polyline_distances(centers, traj)
    return Sketch(tuple(int(v) for v in (d <= radii)))


def lsh_distance(s1: Sketch, s2: Sketch) -> int:
    """Hamming count between two sketches of equal length."""
    if len(s1) != len(s2):
        raise ValueError(f"sketch length mismatch: {len(s1)} vs {len(s2)}")
    return sum(b1 != b2 for b1, b2 in zip(s1.bits, s2.bits))


def make_pair_distance(name: str, params: DistanceParams):
    """Bind a named trajectory-pair distance to its parameters."""
    if name == "hausdorff":
        return hausdorff
    if name == "frechet":
        return discrete_frechet
    if name == "dtw":
        return dtw
    if name == "sspd":
        return sspd
    if name == "lcss":
        return lambda a, b: lcss_dist(a, b, params.epsilon)
    if name == "edr":
        return lambda a, b: edr_dist(a, b, params.epsilon)
    if name == "erp":
        return lambda a, b: erp_dist(a, b, params.gap_point)
    if name == "dq_pi":
        if params.landmarks is None:
            raise ValueError("dq_pi needs a landmark set")
        return lambda a, b: d_Q_pi(a, b, params.landmarks)
    if name == "lsh":
        if not params.lsh_circles:
            raise ValueError("lsh needs circles")
        cache = {}

        def dist(a, b):
            for t in (a, b):
                if t.id not in cache:
                    cache[t.id] = lsh_sketch(t, params.lsh_circles)
            return float(lsh_distance(cache[a.id], cache[b.id]))

        return dist
    raise ValueError(f"unknown distance {name!r}")


def cross_distance_matrix(trajs_a, trajs_b, name: str,
                          params: DistanceParams | None = None,
                          max_workers=None) -> np.ndarray:
    """(len(a), len(b)) matrix of a named distance between two trajectory
    sequences; cells are independent of the worker count."""
    params = params or DistanceParams()
    trajs_a, trajs_b = list(trajs_a), list(trajs_b)
    if name == "lsh":
        if not params.lsh_circles:
            raise ValueError("lsh needs circles")
        sa = [lsh_sketch(t, params.lsh_circles) for t in trajs_a]
        sb = [lsh_sketch(t, params.lsh_circles) for t in trajs_b]
        return np.array([[float(lsh_distance(x, y)) for y in sb] for x in sa])
    dist = make_pair_distance(name, params)
    cells = [(i, j) for i in range(len(trajs_a)) for j in range(len(trajs_b))]
    D = np.zeros((len(trajs_a), len(trajs_b)))
    if max_workers is not None and max_workers > 1 and cells:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            vals = list(pool.map(lambda ij: dist(trajs_a[ij[0]], trajs_b[ij[1]]), cells))
    else:
        vals = [dist(trajs_a[i], trajs_b[j]) for i, j in cells]
    for (i, j), v in zip(cells, vals):
        D[i, j] = v
    return D


def distance_matrix(trajs, name: str, params: DistanceParams | None = None,
                    max_workers=None) -> np.ndarray:
    """Symmetric pairwise matrix over a trajectory sequence.

    Every cell is computed independently, so the result does not depend on
    the worker count.
    """
    params = params or DistanceParams()
    trajs = list(trajs)
    if name == "lsh":
        if not params.lsh_circles:
            raise ValueError("lsh needs circles")
        sketches = [lsh_sketch(t, params.lsh_circles) for t in trajs]
        n = len(trajs)
        D = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                D[i, j] = D[j, i] = float(lsh_distance(sketches[i], sketches[j]))
        return D
    dist = make_pair_distance(name, params)
    n = len(trajs)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    D = np.zeros((n, n))
    if max_workers is not None and max_workers > 1 and pairs:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            vals = list(pool.map(lambda ij: dist(trajs[ij[0]], trajs[ij[1]]), pairs))
    else:
        vals = [dist(trajs[i], trajs[j]) for i, j in pairs]
    for (i, j), v in zip(pairs, vals):
        D[i, j] = D[j, i] = v
    return D
