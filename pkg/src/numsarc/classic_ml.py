"""Classical classifiers: KNN (k=3), SMO-trained RBF SVM (C=1), 10-tree forest.

All three are written against plain numpy arrays and are deterministic under
a fixed seed and input order. Labels are {0, 1} at the package boundary; the
SVM works on {-1, +1} internally and its trainer takes them directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError

__all__ = [
    "Standardizer",
    "KnnModel",
    "SvmModel",
    "TreeNode",
    "ForestModel",
    "knn_classify",
    "rbf_kernel",
    "svm_train",
    "svm_decision",
    "svm_predict",
    "svm_grid_search",
    "forest_train",
    "forest_predict",
    "oob_score",
]


@dataclass
class Standardizer:
    """Zero-mean unit-variance scaler; constant columns keep scale 1."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        return cls(mean=mean, scale=scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.array(d["mean"]), np.array(d["scale"]))


# ---------------------------------------------------------------------------
# k-nearest neighbours

@dataclass
class KnnModel:
    k: int
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.k < 1 or self.k % 2 == 0:
            raise DataError(f"KnnModel: k must be a positive odd number, got {self.k}")
        if self.k > len(self.X):
            raise DataError(f"KnnModel: k={self.k} exceeds training size {len(self.X)}")

    def to_dict(self) -> dict:
        return {"k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "KnnModel":
        return cls(d["k"], np.array(d["X"]), np.array(d["y"]))


def knn_classify(model: KnnModel, query: np.ndarray) -> int:
    """Majority label among the k Euclidean-nearest points.

    Distance ties resolve to the lower training index (stable sort); an even
    vote split resolves to label 0.
    """
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (model.X.shape[1],):
        raise DataError(
            f"knn_classify: query has shape {query.shape}, want ({model.X.shape[1]},)"
        )
    d2 = np.sum((model.X - query) ** 2, axis=1)
    order = np.argsort(d2, kind="stable")
    votes = model.y[order[: model.k]]
    ones = int(votes.sum())
    zeros = model.k - ones
    return 1 if ones > zeros else 0


# ---------------------------------------------------------------------------
# SMO-trained SVM with an RBF kernel

def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    """K(u, v) = exp(-gamma * ||u - v||^2); exact ones on the diagonal for A is B."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    d2 = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(d2, 0.0, out=d2)
    if A is B:
        np.fill_diagonal(d2, 0.0)
        d2 = 0.5 * (d2 + d2.T)
    return np.exp(-gamma * d2)


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    support_alpha: np.ndarray
    support_y: np.ndarray  # +-1
    bias: float
    C: float
    gamma: float
    kkt_gap: float = 0.0  # m - M at termination
    n_iter: int = 0

    @property
    def dual_coef(self) -> np.ndarray:
        return self.support_alpha * self.support_y

    def to_dict(self) -> dict:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "support_alpha": self.support_alpha.tolist(),
            "support_y": self.support_y.tolist(),
            "bias": self.bias,
            "C": self.C,
            "gamma": self.gamma,
            "kkt_gap": self.kkt_gap,
            "n_iter": self.n_iter,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        return cls(
            np.array(d["support_vectors"], dtype=np.float64),
            np.array(d["support_alpha"], dtype=np.float64),
            np.array(d["support_y"], dtype=np.float64),
            d["bias"],
            d["C"],
            d["gamma"],
            d.get("kkt_gap", 0.0),
            d.get("n_iter", 0),
        )


def _select_violating_pair(
    y: np.ndarray, grad: np.ndarray, alpha: np.ndarray, C: float
) -> tuple[int, int, float, float]:
    """First-order maximal violating pair (LIBSVM-style working set selection)."""
    vals = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    up_vals = np.where(up, vals, -np.inf)
    low_vals = np.where(low, vals, np.inf)
    i = int(np.argmax(up_vals))
    j = int(np.argmin(low_vals))
    return i, j, float(up_vals[i]), float(low_vals[j])


def svm_train(
    X: np.ndarray,
    y: np.ndarray,
    C: float = 1.0,
    gamma: float | None = None,
    tol: float = 1e-3,
    max_iter: int | None = None,
) -> SvmModel:
    """Solve the RBF-kernel SVM dual by sequential minimal optimization.

    ``y`` must be in {-1, +1} with both classes present. Iterates on the
    maximal violating pair until the KKT gap m - M drops below ``tol`` or the
    iteration budget (default 10n) runs out.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(X)
    if n < 2:
        raise DataError("svm_train: need at least two samples")
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise DataError("svm_train: labels must be -1/+1 with both classes present")
    if gamma is None:
        gamma = 1.0 / X.shape[1]
    if max_iter is None:
        max_iter = 10 * n

    K = rbf_kernel(X, X, gamma)
    Q = (y[:, None] * y[None, :]) * K
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - e'a

    it = 0
    m = M = 0.0
    for it in range(1, max_iter + 1):
        i, j, m, M = _select_violating_pair(y, grad, alpha, C)
        if m - M <= tol:
            break
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = 1e-12
        step = (m - M) / quad
        # clip to the box while keeping y'a = 0
        step = min(step, (C - alpha[i]) if y[i] > 0 else alpha[i])
        step = min(step, alpha[j] if y[j] > 0 else (C - alpha[j]))
        if step <= 0.0:
            break
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        grad += step * (y[i] * Q[:, i] - y[j] * Q[:, j])
    else:
        _, _, m, M = _select_violating_pair(y, grad, alpha, C)

    gap = m - M
    if not math.isfinite(gap):  # one index set empty: nothing left to violate
        gap = 0.0

    free = (alpha > 1e-12) & (alpha < C - 1e-12)
    if np.any(free):
        bias = float(np.mean(-y[free] * grad[free]))
    elif math.isfinite(m) and math.isfinite(M):
        bias = (m + M) / 2.0
    else:
        bias = 0.0

    sv = alpha > 1e-12
    return SvmModel(
        support_vectors=X[sv].copy(),
        support_alpha=alpha[sv].copy(),
        support_y=y[sv].copy(),
        bias=bias,
        C=C,
        gamma=gamma,
        kkt_gap=gap,
        n_iter=it,
    )


def svm_decision(model: SvmModel, Q: np.ndarray) -> np.ndarray:
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    if Q.shape[1] != model.support_vectors.shape[1]:
        raise DataError(
            f"svm_decision: query dimension {Q.shape[1]} != "
            f"model dimension {model.support_vectors.shape[1]}"
        )
    K = rbf_kernel(Q, model.support_vectors, model.gamma)
    return K @ model.dual_coef + model.bias


def svm_predict(model: SvmModel, query: np.ndarray) -> int:
    """Binary label from the decision sign; an exact zero goes to class 0."""
    return int(svm_decision(model, query)[0] > 0.0)


def svm_grid_search(
    X: np.ndarray,
    y: np.ndarray,
    Cs: Sequence[float] = (0.1, 1.0, 10.0),
    gammas: Sequence[float] | None = None,
    n_folds: int = 3,
    seed: int = 0,
) -> tuple[float, float]:
    """Pick (C, gamma) by mean validation accuracy over seeded folds."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if gammas is None:
        gammas = (0.01, 0.1, 1.0 / X.shape[1], 1.0)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(X))
    folds = [order[f::n_folds] for f in range(n_folds)]
    best: tuple[float, tuple[float, float]] | None = None
    for C in Cs:
        for gamma in gammas:
            accs = []
            for f in range(n_folds):
                val = folds[f]
                trn = np.concatenate([folds[g] for g in range(n_folds) if g != f])
                if len(set(y[trn])) < 2:
                    continue
                model = svm_train(X[trn], y[trn], C=C, gamma=gamma)
                preds = np.where(svm_decision(model, X[val]) > 0.0, 1.0, -1.0)
                accs.append(float(np.mean(preds == y[val])))
            score = float(np.mean(accs)) if accs else 0.0
            if best is None or score > best[0]:
                best = (score, (C, gamma))
    assert best is not None
    return best[1]


# ---------------------------------------------------------------------------
# random forest

@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    counts: tuple[int, int] | None = None  # leaf class counts (zeros, ones)

    @property
    def is_leaf(self) -> bool:
        return self.counts is not None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"counts": list(self.counts)}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "counts" in d:
            return cls(counts=tuple(d["counts"]))
        return cls(
            feature=d["feature"],
            threshold=d["threshold"],
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )


@dataclass
class ForestModel:
    trees: list[TreeNode]
    n_estimators: int
    seed: int
    bootstrap_indices: list[np.ndarray] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "seed": self.seed,
            "trees": [t.to_dict() for t in self.trees],
            "bootstrap_indices": [idx.tolist() for idx in self.bootstrap_indices],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(
            trees=[TreeNode.from_dict(t) for t in d["trees"]],
            n_estimators=d["n_estimators"],
            seed=d["seed"],
            bootstrap_indices=[np.array(i, dtype=np.int64) for i in d["bootstrap_indices"]],
        )

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def _grow_tree(
    X: np.ndarray, y: np.ndarray, rng: np.random.Generator, max_features: int
) -> TreeNode:
    counts = np.bincount(y, minlength=2)
    if len(y) < 2 or counts[0] == 0 or counts[1] == 0:
        return TreeNode(counts=(int(counts[0]), int(counts[1])))
    n_features = X.shape[1]
    candidates = rng.choice(n_features, size=min(max_features, n_features), replace=False)
    best_cost = math.inf
    best_feature = -1
    best_threshold = 0.0
    for f in candidates:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sorted_col = col[order]
        distinct = np.nonzero(np.diff(sorted_col) > 0)[0]
        for d in distinct:
            thr = 0.5 * (sorted_col[d] + sorted_col[d + 1])
            left = col < thr
            n_left = int(left.sum())
            n_right = len(y) - n_left
            cost = (
                n_left * _gini(np.bincount(y[left], minlength=2))
                + n_right * _gini(np.bincount(y[~left], minlength=2))
            ) / len(y)
            if cost < best_cost:
                best_cost = cost
                best_feature = int(f)
                best_threshold = float(thr)
    if best_feature < 0:  # every candidate feature constant
        return TreeNode(counts=(int(counts[0]), int(counts[1])))
    mask = X[:, best_feature] < best_threshold
    return TreeNode(
        feature=best_feature,
        threshold=best_threshold,
        left=_grow_tree(X[mask], y[mask], rng, max_features),
        right=_grow_tree(X[~mask], y[~mask], rng, max_features),
    )


def forest_train(
    X: np.ndarray,
    y: np.ndarray,
    n_estimators: int = 10,
    seed: int = 0,
) -> ForestModel:
    """Bagged Gini trees; ceil(sqrt(d)) candidate features per split."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise DataError("forest_train: empty training set")
    if not set(np.unique(y)) <= {0, 1}:
        raise DataError("forest_train: labels must be 0/1")
    max_features = math.ceil(math.sqrt(X.shape[1]))
    trees: list[TreeNode] = []
    boots: list[np.ndarray] = []
    for child in np.random.SeedSequence(seed).spawn(n_estimators):
        rng = np.random.default_rng(child)
        idx = rng.integers(0, len(X), size=len(X))
        trees.append(_grow_tree(X[idx], y[idx], rng, max_features))
        boots.append(idx)
    return ForestModel(trees=trees, n_estimators=n_estimators, seed=seed, bootstrap_indices=boots)


def _tree_predict(node: TreeNode, x: np.ndarray) -> int:
    while not node.is_leaf:
        node = node.left if x[node.feature] < node.threshold else node.right
    zeros, ones = node.counts
    return 1 if ones > zeros else 0


def forest_predict(model: ForestModel, query: np.ndarray) -> int:
    """Majority vote across trees; an exact tie goes to class 0."""
    query = np.asarray(query, dtype=np.float64)
    ones = sum(_tree_predict(t, query) for t in model.trees)
    return 1 if 2 * ones > len(model.trees) else 0


def oob_score(model: ForestModel, X: np.ndarray, y: np.ndarray) -> float:
    """Out-of-bag accuracy over samples left out of at least one bootstrap."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    in_bag = [set(idx.tolist()) for idx in model.bootstrap_indices]
    correct = total = 0
    for i in range(len(X)):
        votes = [
            _tree_predict(tree, X[i])
            for tree, bag in zip(model.trees, in_bag)
            if i not in bag
        ]
        if not votes:
            continue
        pred = 1 if 2 * sum(votes) > len(votes) else 0
        correct += int(pred == y[i])
        total += 1
    if total == 0:
        raise DataError("oob_score: no out-of-bag samples")
    return correct / total
