"""Native classifiers, the voting ensemble, and the split-evaluation loop.

Everything here is deterministic given its seed. Tie rules are part of the
contract: KNN breaks distance ties by lower training index and vote ties by
the single nearest neighbor's label; tree leaves, forests, and ensembles
break label-vote ties by the smaller label id.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from time import perf_counter

import numpy as np

from .features import FeatureMatrix, featurize, featurize_dataset
from .landmarks import best_of_k, compute_eta, random_landmarks
from .model import Dataset, as_seed_sequence

CLASSIFIER_NAMES = ("knn", "lr", "dt", "rf", "majority", "vote")


def _majority_label(labels, counts) -> int:
    """Most frequent label; ties go to the smaller label id."""
    order = np.argsort(labels, kind="stable")
    best = order[0]
    for i in order:
        if counts[i] > counts[best]:
            best = i
    return int(labels[best])


class KNearestNeighbors:
    """k-nearest-neighbor vote on feature vectors (default k=5)."""

    def __init__(self, k: int = 5):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self._X = None
        self._y = None

    def fit(self, train: FeatureMatrix):
        if len(train) == 0:
            raise ValueError("empty training set")
        if self.k > len(train):
            raise ValueError(f"k={self.k} exceeds the training size {len(train)}")
        self._X = train.X
        self._y = train.y
        return self

    def predict(self, x) -> int:
        diff = self._X - np.asarray(x, dtype=np.float64)
        d2 = np.sum(diff * diff, axis=1)
        return _knn_vote(d2, self._y, self.k)


def _knn_vote(dists, train_y, k) -> int:
    order = np.argsort(dists, kind="stable")[:k]
    votes = train_y[order]
    labels, counts = np.unique(votes, return_counts=True)
    top = counts.max()
    if np.count_nonzero(counts == top) > 1:
        return int(train_y[order[0]])
    return int(labels[np.argmax(counts)])


def knn_predict_matrix(D, train_y, k: int = 5) -> np.ndarray:
    """Predict from a precomputed (n_query, n_train) distance matrix."""
    D = np.asarray(D, dtype=np.float64)
    train_y = np.asarray(train_y)
    if D.ndim != 2 or D.shape[1] != train_y.shape[0]:
        raise ValueError("distance matrix does not match the training labels")
    if not 1 <= k <= train_y.shape[0]:
        raise ValueError(f"k={k} out of range for {train_y.shape[0]} training rows")
    return np.array([_knn_vote(D[i], train_y, k) for i in range(D.shape[0])], dtype=np.int64)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class LogisticRegression:
    """Affine model fit by full-batch gradient descent on L2-penalized log
    loss, starting from zero weights (so fitting is deterministic).

    Binary: score() is the affine decision value and predict() returns the
    larger label exactly when score > 0. More than two labels trains one
    binary model per label (one-vs-rest); argmax of scores predicts, exact
    ties going to the smaller label. A single-class training set yields a
    constant predictor with score 0.
    """

    def __init__(self, iterations: int = 500, learning_rate: float = 0.5, l2: float = 1e-4):
        if iterations < 1 or learning_rate <= 0 or l2 < 0:
            raise ValueError("bad hyperparameters")
        self.iterations = iterations
        self.learning_rate = learning_rate
        self.l2 = l2
        self.classes_ = None
        self._models = None

    def _fit_binary(self, X, y01):
        n, d = X.shape
        w = np.zeros(d)
        b = 0.0
        for _ in range(self.iterations):
            p = _sigmoid(X @ w + b)
            resid = (p - y01) / n
            w -= self.learning_rate * (X.T @ resid + self.l2 * w)
            b -= self.learning_rate * float(resid.sum())
        return w, b

    def fit(self, train: FeatureMatrix):
        if len(train) == 0:
            raise ValueError("empty training set")
        self.classes_ = tuple(sorted(set(int(v) for v in train.y)))
        X = train.X
        if len(self.classes_) == 1:
            self._models = ()
        elif len(self.classes_) == 2:
            y01 = (train.y == self.classes_[1]).astype(np.float64)
            self._models = (self._fit_binary(X, y01),)
        else:
            self._models = tuple(
                self._fit_binary(X, (train.y == c).astype(np.float64))
                for c in self.classes_)
        return self

    def score(self, x) -> float:
        if self.classes_ is None:
            raise ValueError("fit before scoring")
        if len(self.classes_) == 1:
            return 0.0
        if len(self.classes_) != 2:
            raise ValueError("score is a binary decision value; this model is multiclass")
        w, b = self._models[0]
        return float(np.asarray(x, dtype=np.float64) @ w + b)

    def predict(self, x) -> int:
        if len(self.classes_) == 1:
            return self.classes_[0]
        if len(self.classes_) == 2:
            return self.classes_[1] if self.score(x) > 0 else self.classes_[0]
        xv = np.asarray(x, dtype=np.float64)
        scores = np.array([xv @ w + b for w, b in self._models])
        return self.classes_[int(np.argmax(scores))]


def _best_split(X, y_idx, n_classes, features):
    """Highest-scoring axis split among the given features.

    The score sum(cL^2)/nL + sum(cR^2)/nR over class counts is maximal
    exactly where weighted Gini impurity is minimal. Candidate thresholds
    are midpoints between consecutive distinct values; ties keep the lowest
    feature index, then the lowest threshold.
    """
    n = y_idx.shape[0]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_idx] = 1.0
    best = None
    for f in features:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        cum = np.cumsum(onehot[order], axis=0)
        cuts = np.flatnonzero(sv[1:] > sv[:-1])
        if cuts.size == 0:
            continue
        nL = (cuts + 1).astype(np.float64)
        cL = cum[cuts]
        cR = cum[-1] - cL
        S = np.sum(cL * cL, axis=1) / nL + np.sum(cR * cR, axis=1) / (n - nL)
        i = int(np.argmax(S))
        if best is None or S[i] > best[0]:
            b = cuts[i]
            best = (float(S[i]), int(f), float((sv[b] + sv[b + 1]) / 2.0))
    return best


def _grow_tree(X, y_idx, n_classes, depth, max_depth, rng, mtry):
    counts = np.bincount(y_idx, minlength=n_classes)
    leaf = int(np.argmax(counts))
    if counts[leaf] == y_idx.shape[0]:
        return leaf
    if max_depth is not None and depth >= max_depth:
        return leaf
    d = X.shape[1]
    if mtry is None or mtry >= d:
        features = range(d)
    else:
        features = np.sort(rng.choice(d, size=mtry, replace=False))
    best = _best_split(X, y_idx, n_classes, features)
    if best is None:
        return leaf
    _, f, thr = best
    mask = X[:, f] <= thr
    left = _grow_tree(X[mask], y_idx[mask], n_classes, depth + 1, max_depth, rng, mtry)
    right = _grow_tree(X[~mask], y_idx[~mask], n_classes, depth + 1, max_depth, rng, mtry)
    return (f, thr, left, right)


def _tree_predict(node, x):
    while isinstance(node, tuple):
        f, thr, left, right = node
        node = left if x[f] <= thr else right
    return node


class DecisionTree:
    """CART with axis-aligned splits and no depth limit by default.

    Splitting continues even at zero impurity gain as long as a candidate
    threshold exists, so memorizable data (e.g. XOR) reaches zero training
    error. max_depth=0 is a majority stump.
    """

    def __init__(self, max_depth: int | None = None):
        if max_depth is not None and max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        self.max_depth = max_depth
        self.classes_ = None
        self._root = None

    def fit(self, train: FeatureMatrix):
        if len(train) == 0:
            raise ValueError("empty training set")
        self.classes_ = tuple(sorted(set(int(v) for v in train.y)))
        y_idx = np.searchsorted(np.array(self.classes_), train.y)
        self._root = _grow_tree(train.X, y_idx, len(self.classes_),
                                0, self.max_depth, None, None)
        return self

    def predict(self, x) -> int:
        return self.classes_[_tree_predict(self._root, np.asarray(x, dtype=np.float64))]


class RandomForest:
    """Bagged CART trees (default 50) with ceil(sqrt(d)) features per split.

    Disabling the bootstrap (test hook) also disables per-split feature
    subsampling, so a 1-tree forest collapses to the plain decision tree.
    """

    def __init__(self, n_estimators: int = 50, max_depth: int | None = None,
                 seed=None, bootstrap: bool = True):
        if n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.seed = seed
        self.bootstrap = bootstrap
        self.classes_ = None
        self._trees = None

    def fit(self, train: FeatureMatrix):
        if len(train) == 0:
            raise ValueError("empty training set")
        self.classes_ = tuple(sorted(set(int(v) for v in train.y)))
        y_idx = np.searchsorted(np.array(self.classes_), train.y)
        n, d = train.X.shape
        mtry = int(np.ceil(np.sqrt(d))) if self.bootstrap else None
        trees = []
        for child in as_seed_sequence(self.seed).spawn(self.n_estimators):
            rng = np.random.default_rng(child)
            idx = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            trees.append(_grow_tree(train.X[idx], y_idx[idx], len(self.classes_),
                                    0, self.max_depth, rng, mtry))
        self._trees = trees
        return self

    def predict(self, x) -> int:
        xv = np.asarray(x, dtype=np.float64)
        votes = np.bincount([_tree_predict(t, xv) for t in self._trees],
                            minlength=len(self.classes_))
        return self.classes_[int(np.argmax(votes))]


class MajorityClass:
    """Baseline that always predicts the most frequent training label."""

    def __init__(self):
        self._label = None

    def fit(self, train: FeatureMatrix):
        if len(train) == 0:
            raise ValueError("empty training set")
        labels, counts = np.unique(train.y, return_counts=True)
        self._label = _majority_label(labels, counts)
        return self

    def predict(self, x) -> int:
        return self._label


def vote_ensemble_fit(train_ds: Dataset, landmark_source, base, m: int = 5,
                      featurization: str = "vq_exp", seed=None,
                      eta: float | None = None, sigma: float | None = None):
    """Fit m base models on m independently drawn landmark sets.

    ``landmark_source(train_ds, seed)`` yields one LandmarkSet; ``base(seed)``
    yields one unfit model. Prediction featurizes the query under each
    voter's own landmarks and takes the majority, ties to the smaller label.
    m must be odd so binary votes cannot tie.
    """
    if m < 1 or m % 2 == 0:
        raise ValueError("m must be odd and >= 1")
    land_seeds, model_seeds = as_seed_sequence(seed).spawn(2)
    voters = []
    for land_child, model_child in zip(land_seeds.spawn(m), model_seeds.spawn(m)):
        Q = landmark_source(train_ds, land_child)
        M = featurize_dataset(train_ds, featurization, Q=Q, eta=eta, sigma=sigma)
        model = base(model_child)
        model.fit(M)
        voters.append((Q, model))
    return VoteEnsemble(voters, featurization, eta, sigma)


class VoteEnsemble:
    def __init__(self, voters, featurization, eta, sigma):
        self._voters = voters
        self._featurization = featurization
        self._eta = eta
        self._sigma = sigma

    @property
    def m(self) -> int:
        return len(self._voters)

    def predict_trajectory(self, traj) -> int:
        votes = {}
        for Q, model in self._voters:
            v = featurize(traj, self._featurization, Q=Q, eta=self._eta, sigma=self._sigma)
            label = model.predict(v.values)
            votes[label] = votes.get(label, 0) + 1
        labels = np.array(sorted(votes))
        counts = np.array([votes[l] for l in labels])
        return _majority_label(labels, counts)


@dataclass(frozen=True)
class Pipeline:
    """What to run per trial: featurization, landmark strategy, classifier.

    ``distance`` switches to KNN on a trajectory-distance matrix and ignores
    ``featurization`` except for distance="dq", which compares landmark
    feature vectors of the configured kind.
    """

    featurization: str = "vq"
    classifier: str = "rf"
    distance: str | None = None
    n_landmarks: int = 20
    landmark_strategy: str = "random"
    user_landmarks: object = None
    eta: float | None = None
    sigma: float = 1.0
    best_of: int = 3
    voters: int = 5
    vote_base: str = "rf"
    knn_k: int = 5
    n_estimators: int = 50
    max_depth: int | None = None
    lr_iterations: int = 500
    lr_learning_rate: float = 0.5
    epsilon: float = 0.02
    gap_point: tuple = (0.0, 0.0)
    lsh_circles: int = 20

    def __post_init__(self):
        if self.classifier not in CLASSIFIER_NAMES:
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if self.voters < 1 or self.voters % 2 == 0:
            raise ValueError("voters must be odd")
        if self.n_landmarks < 1:
            raise ValueError("n_landmarks must be >= 1")
        if self.landmark_strategy not in ("random", "mistake_driven", "user"):
            raise ValueError(f"unknown landmark strategy {self.landmark_strategy!r}")
        if not 0 < self.epsilon:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class ResultTable:
    """Per-trial misclassification rates for one configured run."""

    dataset: str
    featurization: str
    landmarks: str
    classifier: str
    errors: tuple
    seconds: tuple

    @property
    def mean(self) -> float:
        return float(np.mean(self.errors))

    @property
    def std(self) -> float:
        return float(np.std(self.errors))


def split_indices(n: int, y, train_fraction: float, rng, max_retries: int = 100):
    """One random (unstratified) split; resampled until the training side
    contains every label present in y. Sizes: round(train_fraction*n),
    clamped so both sides are nonempty. Returns sorted index arrays."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    y = np.asarray(y)
    required = set(int(v) for v in y)
    n_train = min(n - 1, max(1, int(round(train_fraction * n))))
    for _ in range(max_retries):
        perm = rng.permutation(n)
        tr = np.sort(perm[:n_train])
        te = np.sort(perm[n_train:])
        if set(int(v) for v in y[tr]) == required:
            return tr, te
    raise RuntimeError(f"no split with all classes in training after {max_retries} tries")


def _eta_for(train_ds: Dataset, p: Pipeline) -> float:
    if p.eta is not None:
        return p.eta
    present = sorted(set(it.label for it in train_ds.items))
    if len(present) == 2:
        return compute_eta(train_ds.by_label(present[0]), train_ds.by_label(present[1]))
    w = train_ds.all_waypoints()
    eta = float(w.std(axis=0).mean())
    return eta if eta > 0 else 1.0


def _needs_eta(p: Pipeline) -> bool:
    return (p.featurization in ("vq_exp",) or p.landmark_strategy == "mistake_driven"
            or p.distance == "lsh")


def _landmarks_for(train_ds: Dataset, p: Pipeline, seed, eta):
    if p.landmark_strategy == "user":
        if p.user_landmarks is None:
            raise ValueError("landmark_strategy 'user' needs user_landmarks")
        return p.user_landmarks
    if p.landmark_strategy == "random":
        return random_landmarks(train_ds, p.n_landmarks, seed)
    present = sorted(set(it.label for it in train_ds.items))
    if len(present) != 2:
        raise ValueError("mistake-driven landmarks need exactly 2 classes")
    return best_of_k(train_ds.by_label(present[0]), train_ds.by_label(present[1]),
                     p.n_landmarks, eta, k=p.best_of, seed=seed)


def _make_model(p: Pipeline, name: str, seed):
    if name == "knn":
        return KNearestNeighbors(p.knn_k)
    if name == "lr":
        return LogisticRegression(p.lr_iterations, p.lr_learning_rate)
    if name == "dt":
        return DecisionTree(p.max_depth)
    if name == "rf":
        return RandomForest(p.n_estimators, max_depth=p.max_depth, seed=seed)
    if name == "majority":
        return MajorityClass()
    raise ValueError(f"unknown classifier {name!r}")


def _predict_rows(model, M: FeatureMatrix) -> np.ndarray:
    return np.array([model.predict(M.X[i]) for i in range(len(M))], dtype=np.int64)


def _feature_trial(train_ds, test_ds, p: Pipeline, seed_land, seed_model):
    eta = _eta_for(train_ds, p) if _needs_eta(p) else p.eta
    kind = p.featurization
    Q = None
    if kind.startswith("vq"):
        Q = _landmarks_for(train_ds, p, seed_land, eta)
    train_M = featurize_dataset(train_ds, kind, Q=Q, eta=eta, sigma=p.sigma)
    test_M = featurize_dataset(test_ds, kind, Q=Q, eta=eta, sigma=p.sigma)
    model = _make_model(p, p.classifier, seed_model)
    model.fit(train_M)
    return _predict_rows(model, test_M)


def _vote_trial(train_ds, test_ds, p: Pipeline, seed_land, seed_model):
    eta = _eta_for(train_ds, p) if _needs_eta(p) else p.eta

    def source(ds, s):
        return _landmarks_for(ds, p, s, eta)

    def base(s):
        return _make_model(p, p.vote_base, s)

    land_seeds = seed_land.spawn(p.voters)
    model_seeds = seed_model.spawn(p.voters)
    voters = []
    for ls, ms in zip(land_seeds, model_seeds):
        Q = source(train_ds, ls)
        M = featurize_dataset(train_ds, p.featurization, Q=Q, eta=eta, sigma=p.sigma)
        model = base(ms)
        model.fit(M)
        voters.append((Q, model))
    ens = VoteEnsemble(voters, p.featurization, eta, p.sigma)
    return np.array([ens.predict_trajectory(it.trajectory) for it in test_ds.items],
                    dtype=np.int64)


def _distance_trial(train_ds, test_ds, p: Pipeline, seed_land, seed_model):
    from .distances import (DistanceParams, cross_distance_matrix, d_Q,
                            random_circles)
    train_y = np.array([it.label for it in train_ds.items], dtype=np.int64)
    if p.distance == "dq":
        eta = _eta_for(train_ds, p) if _needs_eta(p) else p.eta
        kind = p.featurization if p.featurization in ("vq", "vq_exp", "vq_sigma") else "vq"
        Q = _landmarks_for(train_ds, p, seed_land, eta)
        train_M = featurize_dataset(train_ds, kind, Q=Q, eta=eta, sigma=p.sigma)
        test_M = featurize_dataset(test_ds, kind, Q=Q, eta=eta, sigma=p.sigma)
        D = np.array([[d_Q(test_M.X[i], train_M.X[j]) for j in range(len(train_M))]
                      for i in range(len(test_M))])
        return knn_predict_matrix(D, train_y, p.knn_k)
    landmarks = None
    circles = ()
    if p.distance == "dq_pi":
        eta = _eta_for(train_ds, p) if _needs_eta(p) else p.eta
        landmarks = _landmarks_for(train_ds, p, seed_land, eta)
    if p.distance == "lsh":
        present = sorted(set(it.label for it in train_ds.items))
        if len(present) != 2:
            raise ValueError("lsh circle radius rule needs exactly 2 classes")
        circles = random_circles(train_ds.by_label(present[0]),
                                 train_ds.by_label(present[1]),
                                 p.lsh_circles, seed=seed_land)
    params = DistanceParams(epsilon=p.epsilon, gap_point=tuple(p.gap_point),
                            lsh_circles=circles, landmarks=landmarks)
    D = cross_distance_matrix([it.trajectory for it in test_ds.items],
                              [it.trajectory for it in train_ds.items],
                              p.distance, params)
    return knn_predict_matrix(D, train_y, p.knn_k)


def run_trial(train_ds: Dataset, test_ds: Dataset, p: Pipeline, seed_land, seed_model) -> float:
    """Fit the pipeline on train_ds and return the test misclassification rate."""
    y_test = np.array([it.label for it in test_ds.items], dtype=np.int64)
    if p.distance is not None:
        preds = _distance_trial(train_ds, test_ds, p, seed_land, seed_model)
    elif p.classifier == "vote":
        preds = _vote_trial(train_ds, test_ds, p, seed_land, seed_model)
    else:
        preds = _feature_trial(train_ds, test_ds, p, seed_land, seed_model)
    return float(np.mean(preds != y_test))


def evaluate(ds: Dataset, pipeline: Pipeline, trials: int = 50,
             train_fraction: float = 0.7, seed=None, max_workers=None,
             train_is_test: bool = False) -> ResultTable:
    """Repeated random-split evaluation.

    Each trial draws an unstratified split, fits the pipeline on the training
    side only (landmarks and any eta/radius included), and scores the test
    side. All randomness derives from ``seed`` through per-trial sub-seeds,
    so the result is identical at any worker count. ``train_is_test``
    evaluates on the training split (degenerate test hook).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    present = sorted(set(it.label for it in ds.items))
    if len(present) < 2:
        raise ValueError("evaluate needs at least 2 classes")
    y_all = np.array([it.label for it in ds.items], dtype=np.int64)
    trial_seeds = as_seed_sequence(seed).spawn(trials)

    def one(i):
        t0 = perf_counter()
        c_split, c_land, c_model = trial_seeds[i].spawn(3)
        rng = np.random.default_rng(c_split)
        tr, te = split_indices(len(ds.items), y_all, train_fraction, rng)
        if train_is_test:
            te = tr
        err = run_trial(ds.subset(tr), ds.subset(te), pipeline, c_land, c_model)
        return err, perf_counter() - t0

    if max_workers is not None and max_workers > 1 and trials > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, range(trials)))
    else:
        results = [one(i) for i in range(trials)]

    uses_landmarks = (pipeline.distance in ("dq", "dq_pi")
                      or (pipeline.distance is None and pipeline.featurization.startswith("vq")))
    land_label = (f"{pipeline.landmark_strategy}({pipeline.n_landmarks})"
                  if uses_landmarks else "none")
    feat_label = (f"dist-{pipeline.distance}" if pipeline.distance
                  else pipeline.featurization)
    clf_label = (f"vote({pipeline.voters}x{pipeline.vote_base})"
                 if pipeline.classifier == "vote" else pipeline.classifier)
    return ResultTable(
        dataset=ds.name, featurization=feat_label, landmarks=land_label,
        classifier=clf_label, errors=tuple(r[0] for r in results),
        seconds=tuple(r[1] for r in results))
