"""Trajectory data model and preprocessing.

A trajectory is an ordered sequence of planar waypoints, optionally
timestamped, treated everywhere else in the toolkit as the polygonal curve
connecting consecutive waypoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import numpy as np


class Waypoint(NamedTuple):
    x: float
    y: float
    t: float | None = None


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Normalize an int, None, or SeedSequence into a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _frozen_array(values, shape_hint):
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != len(shape_hint):
        raise ValueError(f"expected array of rank {len(shape_hint)}, got shape {arr.shape}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Trajectory:
    """Immutable waypoint sequence.

    ``xy`` is an (n, 2) float array; ``t`` is either an (n,) float array of
    non-decreasing timestamps (seconds since epoch) or None when the source
    data carries no time information.
    """

    id: str
    xy: np.ndarray
    t: np.ndarray | None = None

    def __post_init__(self):
        xy = _frozen_array(self.xy, (0, 0))
        if xy.shape[0] < 1 or xy.shape[1] != 2:
            raise ValueError(f"trajectory {self.id!r} needs an (n>=1, 2) coordinate array")
        if not np.all(np.isfinite(xy)):
            raise ValueError(f"trajectory {self.id!r} has non-finite coordinates")
        object.__setattr__(self, "xy", xy)
        if self.t is not None:
            t = _frozen_array(self.t, (0,))
            if t.shape[0] != xy.shape[0]:
                raise ValueError(f"trajectory {self.id!r}: {t.shape[0]} timestamps for {xy.shape[0]} points")
            if not np.all(np.isfinite(t)):
                raise ValueError(f"trajectory {self.id!r} has non-finite timestamps")
            if np.any(np.diff(t) < 0):
                raise ValueError(f"trajectory {self.id!r} has decreasing timestamps")
            object.__setattr__(self, "t", t)

    def __len__(self):
        return self.xy.shape[0]

    @property
    def timed(self) -> bool:
        return self.t is not None

    def waypoints(self) -> Iterator[Waypoint]:
        for i in range(len(self)):
            yield Waypoint(self.xy[i, 0], self.xy[i, 1], None if self.t is None else float(self.t[i]))

    @classmethod
    def from_waypoints(cls, id: str, points: Sequence[tuple]) -> "Trajectory":
        """Build from (x, y) or (x, y, t) tuples / Waypoints; t all-or-none."""
        xy = [(p[0], p[1]) for p in points]
        ts = [p[2] if len(p) > 2 else None for p in points]
        has_t = [v is not None for v in ts]
        if any(has_t) and not all(has_t):
            raise ValueError(f"trajectory {id!r}: timestamps must be present on all waypoints or none")
        return cls(id=id, xy=np.array(xy, dtype=np.float64), t=np.array(ts, dtype=np.float64) if all(has_t) else None)


@dataclass(frozen=True)
class LabeledTrajectory:
    trajectory: Trajectory
    label: int


@dataclass(frozen=True)
class Dataset:
    """A named collection of labeled trajectories with a declared label set."""

    items: tuple
    labels: tuple
    name: str = ""

    def __post_init__(self):
        items = tuple(self.items)
        labels = tuple(sorted(set(int(l) for l in self.labels)))
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "labels", labels)
        seen = set()
        for it in items:
            if it.label not in labels:
                raise ValueError(f"trajectory {it.trajectory.id!r} has label {it.label} outside the declared set {labels}")
            if it.trajectory.id in seen:
                raise ValueError(f"duplicate trajectory id {it.trajectory.id!r}")
            seen.add(it.trajectory.id)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @classmethod
    def from_items(cls, items, name=""):
        items = tuple(items)
        return cls(items=items, labels=tuple(sorted(set(it.label for it in items))), name=name)

    def subset(self, indices, name=None) -> "Dataset":
        items = tuple(self.items[i] for i in indices)
        return Dataset(items=items, labels=self.labels, name=self.name if name is None else name)

    def by_label(self, label) -> "Dataset":
        return Dataset(items=tuple(it for it in self.items if it.label == label), labels=self.labels, name=self.name)

    def all_waypoints(self) -> np.ndarray:
        """All waypoint coordinates stacked into one (N, 2) array."""
        return np.concatenate([it.trajectory.xy for it in self.items], axis=0)


def remove_stationary(traj: Trajectory) -> Trajectory:
    """Drop waypoints that repeat the previous retained (x, y) exactly.

    The first waypoint is always retained and order is preserved, so applying
    this twice equals applying it once.
    """
    xy = traj.xy
    if len(traj) == 1:
        return traj
    # compare against the retained predecessor, not the raw one, so runs of
    # repeats collapse onto their first element
    retained = [0]
    for i in range(1, len(traj)):
        j = retained[-1]
        if xy[i, 0] != xy[j, 0] or xy[i, 1] != xy[j, 1]:
            retained.append(i)
    idx = np.array(retained, dtype=np.intp)
    if len(idx) == len(traj):
        return traj
    return Trajectory(id=traj.id, xy=xy[idx], t=None if traj.t is None else traj.t[idx])


def filter_length(ds: Dataset, min_points: int = 10, max_points: int | None = None) -> Dataset:
    """Keep trajectories with min_points <= n and, when given, n <= max_points."""
    if min_points < 1:
        raise ValueError("min_points must be >= 1")
    items = tuple(
        it for it in ds.items
        if len(it.trajectory) >= min_points and (max_points is None or len(it.trajectory) <= max_points)
    )
    return Dataset(items=items, labels=ds.labels, name=ds.name)


def _require_timed(traj: Trajectory, op: str):
    if traj.t is None:
        raise ValueError(f"{op}: trajectory {traj.id!r} has no timestamps")


def _parts(traj: Trajectory, cut_after: list) -> list:
    """Slice traj at the given cut positions (cut after index i)."""
    bounds = [0] + [c + 1 for c in cut_after] + [len(traj)]
    out = []
    for k in range(len(bounds) - 1):
        lo, hi = bounds[k], bounds[k + 1]
        out.append(Trajectory(id=f"{traj.id}_p{k}", xy=traj.xy[lo:hi], t=traj.t[lo:hi]))
    return out


def partition_by_gap(traj: Trajectory, threshold: float = 1200.0) -> list:
    """Split wherever the time difference between consecutive waypoints strictly
    exceeds ``threshold`` seconds. Outputs concatenate back to the input."""
    _require_timed(traj, "partition_by_gap")
    gaps = np.diff(traj.t)
    cuts = [int(i) for i in np.nonzero(gaps > threshold)[0]]
    return _parts(traj, cuts)


def partition_by_duration(traj: Trajectory, max_duration: float = 1200.0) -> list:
    """Greedy left-to-right split into parts whose duration (last t minus
    first t) is at most ``max_duration`` seconds."""
    _require_timed(traj, "partition_by_duration")
    t = traj.t
    cuts = []
    start = 0
    for i in range(1, len(traj)):
        if t[i] - t[start] > max_duration:
            cuts.append(i - 1)
            start = i
    return _parts(traj, cuts)


def augment_noise(traj: Trajectory, seed, init_offset=(0.001, 0.001), noise_std=1e-4) -> Trajectory:
    """Shift every waypoint by a random-walk offset vector.

    The offset starts at ``init_offset`` (applied to the first waypoint) and,
    before each subsequent waypoint, gains an isotropic Gaussian step with
    per-axis standard deviation ``noise_std``. Timestamps are unchanged.
    """
    rng = np.random.default_rng(seed)
    n = len(traj)
    steps = rng.normal(0.0, noise_std, size=(n - 1, 2)) if n > 1 else np.zeros((0, 2))
    offsets = np.empty((n, 2))
    offsets[0] = init_offset
    if n > 1:
        offsets[1:] = np.asarray(init_offset) + np.cumsum(steps, axis=0)
    return Trajectory(id=traj.id, xy=traj.xy + offsets, t=traj.t)


def simulate_noisy_copies(ds: Dataset, copies: dict, seed) -> Dataset:
    """Extend a dataset with noisy copies of its trajectories.

    ``copies`` maps label -> how many augmented copies to add per trajectory
    of that label; originals are kept.
    """
    seeds = as_seed_sequence(seed).spawn(len(ds.items))
    items = list(ds.items)
    for it, ss in zip(ds.items, seeds):
        n_copies = copies.get(it.label, 0)
        child = ss.spawn(n_copies)
        for c in range(n_copies):
            noisy = augment_noise(it.trajectory, child[c])
            items.append(LabeledTrajectory(
                trajectory=Trajectory(id=f"{it.trajectory.id}~n{c}", xy=noisy.xy, t=noisy.t),
                label=it.label,
            ))
    return Dataset(items=tuple(items), labels=ds.labels, name=ds.name)
