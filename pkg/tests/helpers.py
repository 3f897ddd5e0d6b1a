"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np

from trajkit import Dataset, LabeledTrajectory, Trajectory


def traj(points, id="t", t=None):
    return Trajectory(id=id, xy=np.asarray(points, dtype=np.float64),
                      t=None if t is None else np.asarray(t, dtype=np.float64))


def random_trajectory(rng, id, n_lo=3, n_hi=12, scale=5.0, timed=False):
    n = int(rng.integers(n_lo, n_hi + 1))
    xy = rng.uniform(-scale, scale, size=(n, 2))
    t = np.sort(rng.uniform(0.0, 1000.0, size=n)) if timed else None
    return Trajectory(id=id, xy=xy, t=t)


def random_dataset(rng, n_items=10, labels=(0, 1), name="rand", timed=False, **kw):
    items = []
    for i in range(n_items):
        items.append(LabeledTrajectory(
            random_trajectory(rng, f"{name}{i}", timed=timed, **kw),
            int(labels[i % len(labels)])))
    return Dataset.from_items(items, name=name)


def bundles_dataset(rng, counts=(12, 12), n_points=10, sep=4.0, noise=0.05,
                    name="bundles", timed=False):
    """Two well-separated bundles of jittered near-horizontal polylines:
    class 0 near y=0, class 1 near y=sep. Linearly separable by landmark
    features for any sensible landmark placement."""
    items = []
    for c, count in enumerate(counts):
        y0 = c * sep
        for k in range(count):
            xs = np.linspace(0.0, 1.0, n_points)
            ys = y0 + rng.normal(0.0, noise, size=n_points)
            t = np.arange(n_points, dtype=np.float64) if timed else None
            items.append(LabeledTrajectory(
                Trajectory(id=f"{name}{c}_{k}", xy=np.column_stack([xs, ys]), t=t), c))
    return Dataset.from_items(items, name=name)
