"""Landmark set generation.

Random landmarks draw from a wide normal around the data; mistake-driven
selection grows the set one landmark at a time, each placed near the training
trajectory the current classifier gets most wrong. Scales: eta is the
distance between the two classes' waypoint means and doubles as the
perturbation scale.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .features import FeatureMatrix
from .geometry import polyline_distances
from .model import Dataset, _frozen_array, as_seed_sequence

PROVENANCES = ("random", "mistake_driven", "user")


@dataclass(frozen=True)
class LandmarkSet:
    xy: np.ndarray
    provenance: str = "user"

    def __post_init__(self):
        xy = _frozen_array(self.xy, (0, 0))
        if xy.shape[0] < 1 or xy.shape[1] != 2:
            raise ValueError("a landmark set is a nonempty (n, 2) array")
        if not np.all(np.isfinite(xy)):
            raise ValueError("landmark coordinates must be finite")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "xy", xy)

    def __len__(self) -> int:
        return self.xy.shape[0]


def compute_eta(train1: Dataset, train2: Dataset) -> float:
    """Distance between the two classes' waypoint means (waypoints pooled,
    so long trajectories weigh more). Zero distance falls back to the mean
    per-axis spread so the scale stays positive."""
    if not train1.items or not train2.items:
        raise ValueError("compute_eta needs both classes nonempty")
    m1 = train1.all_waypoints().mean(axis=0)
    m2 = train2.all_waypoints().mean(axis=0)
    eta = float(np.linalg.norm(m1 - m2))
    if eta > 0.0:
        return eta
    pooled = np.concatenate([train1.all_waypoints(), train2.all_waypoints()], axis=0)
    eta = float(pooled.std(axis=0).mean())
    return eta if eta > 0.0 else 1.0


def random_landmarks(ds: Dataset, n: int, seed) -> LandmarkSet:
    """n draws from a per-axis normal centered on the waypoint mean with 4x
    the per-axis waypoint standard deviation."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not ds.items:
        raise ValueError("dataset is empty")
    w = ds.all_waypoints()
    mean = w.mean(axis=0)
    scale = 4.0 * w.std(axis=0)
    rng = np.random.default_rng(seed)
    return LandmarkSet(rng.normal(mean, scale, size=(n, 2)), "random")


def _default_clf():
    from .classify import LogisticRegression
    return LogisticRegression()


def _exp_matrix(trajs, y, Q_xy, eta) -> FeatureMatrix:
    ssq = eta * eta
    X = np.stack([np.exp(-polyline_distances(Q_xy, t) ** 2 / ssq) for t in trajs])
    return FeatureMatrix(X, y, tuple(t.id for t in trajs), "vq_exp")


def _perturbed_waypoint(rng, xy, scale):
    i = int(rng.integers(xy.shape[0]))
    return xy[i] + rng.normal(0.0, scale, size=2)


def mistake_driven(T1: Dataset, T2: Dataset, n: int, eta: float, clf=None,
                   seed=None, noise_scale=None) -> LandmarkSet:
    """Grow n landmarks by chasing classifier mistakes.

    Start from a random waypoint of a random training trajectory plus
    isotropic Gaussian noise at scale eta. Then, repeatedly: featurize the
    training data with the current set (vq_exp at scale eta), fit the
    classifier, and perturb a random waypoint of the trajectory whose score
    lies farthest on the wrong side of the decision threshold (when nothing
    is misclassified, the correct one with the smallest margin).

    ``noise_scale`` overrides the perturbation scale; 0 pins landmarks to
    training waypoints exactly (test hook).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not T1.items or not T2.items:
        raise ValueError("both classes must be nonempty")
    if eta <= 0:
        raise ValueError("eta must be positive")
    factory = clf if clf is not None else _default_clf
    scale = eta if noise_scale is None else noise_scale
    trajs = [it.trajectory for it in T1.items] + [it.trajectory for it in T2.items]
    y = np.array([1] * len(T1.items) + [0] * len(T2.items), dtype=np.int64)
    rng = np.random.default_rng(seed)

    ti = int(rng.integers(len(trajs)))
    points = [_perturbed_waypoint(rng, trajs[ti].xy, scale)]
    for _ in range(1, n):
        Q_xy = np.stack(points)
        train = _exp_matrix(trajs, y, Q_xy, eta)
        model = factory()
        if not hasattr(model, "score"):
            raise TypeError("mistake_driven needs a classifier with real-valued scores")
        model.fit(train)
        scores = np.array([model.score(train.X[i]) for i in range(len(trajs))])
        margins = np.where(y == 1, scores, -scores)
        preds = np.array([model.predict(train.X[i]) for i in range(len(trajs))])
        wrong = preds != y
        pool = np.flatnonzero(wrong) if wrong.any() else np.arange(len(trajs))
        worst = pool[int(np.argmin(margins[pool]))]
        points.append(_perturbed_waypoint(rng, trajs[worst].xy, scale))
    return LandmarkSet(np.stack(points), "mistake_driven")


def training_error(T1: Dataset, T2: Dataset, Q: LandmarkSet, eta: float, clf=None) -> float:
    """Misclassification rate of a fresh classifier fit on vq_exp features."""
    factory = clf if clf is not None else _default_clf
    trajs = [it.trajectory for it in T1.items] + [it.trajectory for it in T2.items]
    y = np.array([1] * len(T1.items) + [0] * len(T2.items), dtype=np.int64)
    train = _exp_matrix(trajs, y, Q.xy, eta)
    model = factory()
    model.fit(train)
    preds = np.array([model.predict(train.X[i]) for i in range(len(trajs))])
    return float(np.mean(preds != y))


def best_of_k(T1: Dataset, T2: Dataset, n: int, eta: float, clf=None, k: int = 3,
              seed=None, noise_scale=None, max_workers=None) -> LandmarkSet:
    """Run mistake_driven k times on derived sub-seeds and keep the set with
    the lowest training error; ties go to the earliest run."""
    if k < 1:
        raise ValueError("k must be >= 1")
    seeds = as_seed_sequence(seed).spawn(k)

    def one(s):
        Q = mistake_driven(T1, T2, n, eta, clf=clf, seed=s, noise_scale=noise_scale)
        return Q, training_error(T1, T2, Q, eta, clf=clf)

    if max_workers is not None and max_workers > 1 and k > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    best = min(range(k), key=lambda i: (results[i][1], i))
    return results[best][0]
