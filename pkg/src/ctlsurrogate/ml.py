"""Seeded train/test split and five from-scratch binary classifiers.

Every estimator is deterministic given (data, hyperparameters, seed); the
only randomness comes from the package's xoshiro256** generator. Models
serialise to JSON, whose float repr round-trips exactly.
"""

from __future__ import annotations

import json
import math
import statistics
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .features import Dataset
from .rng import Xoshiro256, derive_seed

ALGORITHMS = ("RF", "BT", "KNN", "DT", "LR")

DEFAULT_HYPERPARAMS: dict[str, dict[str, Any]] = {
    "LR": {"learning_rate": 0.1, "epochs": 200, "l2": 1e-4},
    "DT": {"max_depth": 10, "min_leaf": 1},
    "RF": {"n_trees": 10, "max_depth": 10, "min_leaf": 1, "max_features": "sqrt"},
    "BT": {"n_rounds": 10, "max_depth": 6, "learning_rate": 0.3, "reg_lambda": 1.0, "min_leaf": 1},
    "KNN": {"k": 5},
}

MODEL_FORMAT = "ctl-surrogate-model"


# --- splitting -------------------------------------------------------------

@dataclass(frozen=True)
class SplitConfig:
    seed: int
    fraction: float

    def __post_init__(self):
        if not 0 < self.fraction < 1:
            raise ValueError("fraction must lie strictly between 0 and 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def split_indices(n: int, cfg: SplitConfig) -> tuple[np.ndarray, np.ndarray]:
    """Shuffle 0..n-1 with the split seed; the first floor(fraction*n) go to train.

    Both parts come back in ascending (original) order.
    """
    if n < 1:
        raise ValueError("cannot split an empty dataset")
    order = list(range(n))
    Xoshiro256(cfg.seed).shuffle(order)
    # decimal value of the fraction, so 0.86 * 400 floors to 344
    n_train = math.floor(Fraction(str(cfg.fraction)) * n)
    return np.array(sorted(order[:n_train]), dtype=np.int64), np.array(sorted(order[n_train:]), dtype=np.int64)


def split(records: Dataset, cfg: SplitConfig) -> tuple[Dataset, Dataset]:
    train_idx, test_idx = split_indices(len(records), cfg)
    return records.subset(train_idx), records.subset(test_idx)


# --- trees -----------------------------------------------------------------

@dataclass
class Tree:
    """Flat binary tree; ``feature[i] == -1`` marks a leaf holding ``value[i]``.

    Internal nodes send ``x[feature] <= threshold`` left.
    """

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def leaf_value(self, x) -> float:
        feature, threshold = self.feature, self.threshold
        i = 0
        while feature[i] >= 0:
            i = self.left[i] if x[feature[i]] <= threshold[i] else self.right[i]
        return self.value[i]

    def apply(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.leaf_value(x) for x in X])

    @property
    def depth(self) -> int:
        def d(i):
            return 0 if self.feature[i] < 0 else 1 + max(d(self.left[i]), d(self.right[i]))

        return d(0)

    def to_dict(self) -> dict:
        return {k: list(getattr(self, k)) for k in ("feature", "threshold", "left", "right", "value")}

    @classmethod
    def from_dict(cls, d: dict) -> Tree:
        return cls(
            [int(v) for v in d["feature"]],
            [float(v) for v in d["threshold"]],
            [int(v) for v in d["left"]],
            [int(v) for v in d["right"]],
            [float(v) for v in d["value"]],
        )


def _gini_score(sums: np.ndarray, counts: np.ndarray) -> np.ndarray:
    # larger is purer: sum over classes of n_c^2 / n
    pos = sums[..., 0]
    return (pos * pos + (counts - pos) ** 2) / counts


def _gini_leaf(sums: np.ndarray, count: int) -> float:
    return float(sums[0] / count)


def _newton_score(reg_lambda: float):
    def score(sums, counts):
        return sums[..., 0] ** 2 / (sums[..., 1] + reg_lambda)

    return score


def _newton_leaf(reg_lambda: float):
    def leaf(sums, count):
        return float(-sums[0] / (sums[1] + reg_lambda))

    return leaf


def grow_tree(
    X: np.ndarray,
    stats: np.ndarray,
    score: Callable[[np.ndarray, np.ndarray], np.ndarray],
    leaf: Callable[[np.ndarray, int], float],
    max_depth: int,
    min_leaf: int = 1,
    feature_sampler: Callable[[], np.ndarray] | None = None,
) -> Tree:
    """Greedy CART growth maximising ``score(left) + score(right) - score(parent)``.

    ``stats`` is (n, c) per-sample statistics summed into each child; a node
    whose rows all carry the same statistics becomes a leaf. Ties
    between candidate splits go to the lowest feature index, then the lowest
    threshold.
    """
    tree = Tree()
    n_features = X.shape[1]

    def make_leaf(rows) -> int:
        tree.feature.append(-1)
        tree.threshold.append(0.0)
        tree.left.append(-1)
        tree.right.append(-1)
        tree.value.append(leaf(stats[rows].sum(axis=0), len(rows)))
        return len(tree.feature) - 1

    def best_split(rows):
        m = len(rows)
        feats = feature_sampler() if feature_sampler is not None else np.arange(n_features)
        Xn = X[np.ix_(rows, feats)]
        order = np.argsort(Xn, axis=0, kind="stable")
        xs = np.take_along_axis(Xn, order, axis=0)
        S = stats[rows]
        cum = np.cumsum(S[order], axis=0)[:-1]  # (m-1, f, c): left child = first i+1 rows
        total = S.sum(axis=0)
        n_left = np.arange(1, m, dtype=np.float64)[:, None]
        gain = score(cum, n_left) + score(total - cum, m - n_left) - score(total, np.float64(m))
        valid = xs[:-1] < xs[1:]
        pos = np.arange(1, m)[:, None]
        valid &= (pos >= min_leaf) & (m - pos >= min_leaf)
        gain = np.where(valid, gain, -np.inf)
        flat = gain.T.ravel()
        if flat.size == 0:
            return None
        best = int(np.argmax(flat))
        # zero-gain splits are allowed (XOR needs one at the root)
        if not np.isfinite(flat[best]) or flat[best] < -1e-12:
            return None
        j, i = divmod(best, m - 1)
        f = int(feats[j])
        thr = float((xs[i, j] + xs[i + 1, j]) / 2)
        return f, thr

    def grow(rows, depth) -> int:
        if depth >= max_depth or len(rows) < 2 * min_leaf:
            return make_leaf(rows)
        if (stats[rows] == stats[rows[0]]).all():
            return make_leaf(rows)
        found = best_split(rows)
        if found is None:
            return make_leaf(rows)
        f, thr = found
        go_left = X[rows, f] <= thr
        node = len(tree.feature)
        tree.feature.append(f)
        tree.threshold.append(thr)
        tree.left.append(-1)
        tree.right.append(-1)
        tree.value.append(0.0)
        tree.left[node] = grow(rows[go_left], depth + 1)
        tree.right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(np.arange(len(X)), 0)
    return tree


# --- models ----------------------------------------------------------------

def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def log_loss(scores: np.ndarray, y: np.ndarray) -> float:
    """Mean logistic loss for raw scores and {0,1} targets."""
    return float(np.mean(np.logaddexp(0.0, scores) - y * scores))


class TrainedModel:
    """Common surface: ``predict_one``, ``params``/``from_params``.

    ``constant`` is set when training saw a single class; such a model
    predicts that class everywhere.
    """

    algorithm: str = ""

    def __init__(self, hyperparams: dict, n_features: int, constant: bool | None = None):
        self.hyperparams = dict(hyperparams)
        self.n_features = n_features
        self.constant = constant

    def predict_one(self, x: np.ndarray) -> bool:
        if self.constant is not None:
            return self.constant
        return self._predict(x)

    def _predict(self, x: np.ndarray) -> bool:
        raise NotImplementedError

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int) -> None:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError

    def load_params(self, params: dict) -> None:
        raise NotImplementedError


class LogisticRegression(TrainedModel):
    """Full-batch gradient descent on standardised features.

    Feature means and scales are part of the fitted state, so raw vectors are
    passed to ``predict_one``.
    """

    algorithm = "LR"

    def fit(self, X, y, seed):
        hp = self.hyperparams
        lr, epochs, l2 = float(hp["learning_rate"]), int(hp["epochs"]), float(hp["l2"])
        self.mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        self.scale = scale
        Z = (X - self.mean) / self.scale
        t = y.astype(np.float64)
        n = len(t)
        w = np.zeros(X.shape[1])
        b = 0.0

        def loss(w, b):
            return log_loss(Z @ w + b, t) + 0.5 * l2 * float(w @ w)

        self.loss_history = [loss(w, b)]
        for _ in range(epochs):
            r = sigmoid(Z @ w + b) - t
            w = w - lr * (Z.T @ r / n + l2 * w)
            b = b - lr * float(r.mean())
            self.loss_history.append(loss(w, b))
        self.weights = w
        self.bias = b

    def decision_function(self, x):
        return float(((x - self.mean) / self.scale) @ self.weights + self.bias)

    def _predict(self, x):
        return sigmoid(self.decision_function(x)) >= 0.5

    def params(self):
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
        }

    def load_params(self, p):
        self.weights = np.array(p["weights"], dtype=np.float64)
        self.bias = float(p["bias"])
        self.mean = np.array(p["mean"], dtype=np.float64)
        self.scale = np.array(p["scale"], dtype=np.float64)


class DecisionTree(TrainedModel):
    algorithm = "DT"

    def fit(self, X, y, seed):
        hp = self.hyperparams
        self.tree = grow_tree(
            X, y.astype(np.float64)[:, None], _gini_score, _gini_leaf,
            int(hp["max_depth"]), int(hp["min_leaf"]),
        )

    def _predict(self, x):
        return self.tree.leaf_value(x) >= 0.5

    def params(self):
        return {"tree": self.tree.to_dict()}

    def load_params(self, p):
        self.tree = Tree.from_dict(p["tree"])


def _n_sub_features(spec, d: int) -> int:
    if spec == "sqrt":
        return max(1, math.isqrt(d))
    if isinstance(spec, float) and 0 < spec <= 1:
        return max(1, int(spec * d))
    return max(1, min(d, int(spec)))


class RandomForest(TrainedModel):
    """Bagged Gini trees with a fresh feature subsample at every node.

    Tree ``i`` draws its bootstrap sample and its feature subsets from a
    generator seeded with ``derive_seed(train_seed, i)``.
    """

    algorithm = "RF"

    def fit(self, X, y, seed):
        hp = self.hyperparams
        n, d = X.shape
        mtry = _n_sub_features(hp["max_features"], d)
        stats = y.astype(np.float64)[:, None]
        self.trees: list[Tree] = []
        self.tree_seeds: list[int] = []
        for i in range(int(hp["n_trees"])):
            tree_seed = derive_seed(seed, i)
            rng = Xoshiro256(tree_seed)
            rows = np.array([rng.below(n) for _ in range(n)], dtype=np.int64)

            def sampler(rng=rng):
                pool = list(range(d))
                for j in range(mtry):
                    r = j + rng.below(d - j)
                    pool[j], pool[r] = pool[r], pool[j]
                return np.array(sorted(pool[:mtry]), dtype=np.int64)

            self.trees.append(
                grow_tree(X[rows], stats[rows], _gini_score, _gini_leaf,
                          int(hp["max_depth"]), int(hp["min_leaf"]), sampler)
            )
            self.tree_seeds.append(tree_seed)

    def probability(self, x) -> float:
        return sum(t.leaf_value(x) for t in self.trees) / len(self.trees)

    def _predict(self, x):
        return self.probability(x) >= 0.5

    def params(self):
        return {"trees": [t.to_dict() for t in self.trees], "tree_seeds": self.tree_seeds}

    def load_params(self, p):
        self.trees = [Tree.from_dict(t) for t in p["trees"]]
        self.tree_seeds = [int(s) for s in p["tree_seeds"]]


class BoostedTrees(TrainedModel):
    """Gradient boosting on logistic loss.

    Each round fits a regression tree to the loss gradients with
    second-order split gain and Newton leaf values ``-G / (H + lambda)``.
    """

    algorithm = "BT"

    def fit(self, X, y, seed):
        hp = self.hyperparams
        lr, lam = float(hp["learning_rate"]), float(hp["reg_lambda"])
        t = y.astype(np.float64)
        p0 = float(t.mean())
        self.init_score = math.log(p0 / (1.0 - p0))
        self.learning_rate = lr
        F = np.full(len(t), self.init_score)
        self.loss_history = [log_loss(F, t)]
        self.trees: list[Tree] = []
        for _ in range(int(hp["n_rounds"])):
            p = sigmoid(F)
            stats = np.column_stack([p - t, p * (1.0 - p)])
            tree = grow_tree(X, stats, _newton_score(lam), _newton_leaf(lam),
                             int(hp["max_depth"]), int(hp["min_leaf"]))
            F = F + lr * tree.apply(X)
            self.trees.append(tree)
            self.loss_history.append(log_loss(F, t))

    def decision_function(self, x) -> float:
        return self.init_score + self.learning_rate * sum(t.leaf_value(x) for t in self.trees)

    def _predict(self, x):
        return sigmoid(self.decision_function(x)) >= 0.5

    def params(self):
        return {
            "init_score": self.init_score,
            "learning_rate": self.learning_rate,
            "trees": [t.to_dict() for t in self.trees],
        }

    def load_params(self, p):
        self.init_score = float(p["init_score"])
        self.learning_rate = float(p["learning_rate"])
        self.trees = [Tree.from_dict(t) for t in p["trees"]]


class KNearestNeighbors(TrainedModel):
    """Majority vote of the k nearest training rows by Euclidean distance.

    Equal distances rank by training index; a split vote goes to False.
    """

    algorithm = "KNN"

    def fit(self, X, y, seed):
        self.X = np.array(X, dtype=np.float64)
        self.y = np.array(y, dtype=bool)

    def _predict(self, x):
        k = int(self.hyperparams["k"])
        dist = np.sqrt(((self.X - x) ** 2).sum(axis=1))
        nearest = np.argsort(dist, kind="stable")[:k]
        yes = int(self.y[nearest].sum())
        return yes > len(nearest) - yes

    def params(self):
        return {"X": self.X.tolist(), "y": [int(v) for v in self.y]}

    def load_params(self, p):
        self.X = np.array(p["X"], dtype=np.float64).reshape(-1, self.n_features)
        self.y = np.array(p["y"], dtype=bool)


MODEL_TYPES: dict[str, type[TrainedModel]] = {
    cls.algorithm: cls
    for cls in (RandomForest, BoostedTrees, KNearestNeighbors, DecisionTree, LogisticRegression)
}


def resolve_hyperparams(algorithm: str, overrides: dict | None = None) -> dict:
    if algorithm not in MODEL_TYPES:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    hp = dict(DEFAULT_HYPERPARAMS[algorithm])
    for key, value in (overrides or {}).items():
        if key not in hp:
            raise ValueError(f"unknown hyperparameter {key!r} for {algorithm}")
        hp[key] = value
    _validate(algorithm, hp)
    return hp


def _validate(algorithm: str, hp: dict) -> None:
    positive_ints = {"epochs", "max_depth", "min_leaf", "n_trees", "n_rounds", "k"}
    for key, value in hp.items():
        if key in positive_ints and (int(value) != value or value < 1):
            raise ValueError(f"{algorithm}.{key} must be a positive integer, got {value!r}")
        if key == "learning_rate" and not value > 0:
            raise ValueError(f"{algorithm}.learning_rate must be positive")
        if key in ("l2", "reg_lambda") and value < 0:
            raise ValueError(f"{algorithm}.{key} must be non-negative")
        if key == "max_features" and value != "sqrt" and not (isinstance(value, (int, float)) and value > 0):
            raise ValueError(f"{algorithm}.max_features must be 'sqrt' or positive")


def train(algorithm: str, data: Dataset, hyperparams: dict | None = None, train_seed: int = 0) -> TrainedModel:
    if len(data) == 0:
        raise ValueError("training set is empty")
    hp = resolve_hyperparams(algorithm, hyperparams)
    model = MODEL_TYPES[algorithm](hp, data.dim)
    classes = np.unique(data.y)
    if len(classes) == 1:
        model.constant = bool(classes[0])
        return model
    model.fit(data.X, data.y, train_seed)
    return model


def predict(model: TrainedModel, features: np.ndarray) -> bool:
    if len(features) != model.n_features:
        raise ValueError(f"feature dimension {len(features)} != model dimension {model.n_features}")
    return bool(model.predict_one(features))


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    mean_predict_ns: float
    n_test: int


def evaluate(model: TrainedModel, test: Dataset, repeats: int = 5, warmup: bool = True) -> EvalReport:
    """Test accuracy plus mean per-record prediction time.

    After one untimed pass over the test set, each record is predicted
    ``repeats`` times and the median time is kept.
    """
    if len(test) == 0:
        raise ValueError("test set is empty")
    rows = list(test.X)
    if warmup:
        for x in rows:
            predict(model, x)
    correct = 0
    times = []
    clock = time.perf_counter_ns
    for x, label in zip(rows, test.y):
        samples = []
        for _ in range(repeats):
            t0 = clock()
            out = predict(model, x)
            samples.append(clock() - t0)
        times.append(statistics.median(samples))
        correct += out == bool(label)
    return EvalReport(correct / len(rows), float(np.mean(times)), len(rows))


def majority_baseline(train: Dataset, test: Dataset) -> float:
    """Test accuracy of always predicting the training majority (ties -> False)."""
    guess = bool(train.y.sum() * 2 > len(train.y))
    return float(np.mean(test.y == guess))


# --- persistence -------------------------------------------------------------

def dumps_model(model: TrainedModel) -> str:
    doc = {
        "format": MODEL_FORMAT,
        "version": 1,
        "algorithm": model.algorithm,
        "hyperparams": model.hyperparams,
        "n_features": model.n_features,
        "constant": model.constant,
        "params": None if model.constant is not None else model.params(),
    }
    return json.dumps(doc)


def loads_model(text: str) -> TrainedModel:
    doc = json.loads(text)
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError("not a ctl-surrogate model file")
    cls = MODEL_TYPES[doc["algorithm"]]
    model = cls(doc["hyperparams"], int(doc["n_features"]), doc["constant"])
    if model.constant is None:
        model.load_params(doc["params"])
    return model
