"""Bagged CART forests and least-squares gradient boosting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._cart import build_tree, mean_trees, predict_trees, presort


@dataclass(frozen=True)
class TreeEnsemble:
    """Flat storage for several trees; child indices are absolute."""

    roots: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @classmethod
    def concat(cls, trees) -> "TreeEnsemble":
        roots, parts = [], [[], [], [], [], []]
        offset = 0
        for feature, threshold, left, right, value in trees:
            roots.append(offset)
            parts[0].append(feature)
            parts[1].append(threshold)
            parts[2].append(np.where(left >= 0, left + offset, -1))
            parts[3].append(np.where(right >= 0, right + offset, -1))
            parts[4].append(value)
            offset += len(feature)
        arrays = [np.concatenate(p) for p in parts]
        for a in arrays:
            a.setflags(write=False)
        roots = np.asarray(roots, dtype=np.int64)
        roots.setflags(write=False)
        return cls(roots, *arrays)

    @property
    def n_trees(self) -> int:
        return len(self.roots)

    def tree_sum(self, X: np.ndarray) -> np.ndarray:
        return predict_trees(np.ascontiguousarray(X, dtype=np.float64), self.roots,
                             self.feature, self.threshold, self.left, self.right, self.value)

    def tree_mean(self, X: np.ndarray) -> np.ndarray:
        return mean_trees(np.ascontiguousarray(X, dtype=np.float64), self.roots,
                          self.feature, self.threshold, self.left, self.right, self.value)

    def arrays(self) -> dict:
        return {name: getattr(self, name) for name in
                ("roots", "feature", "threshold", "left", "right", "value")}


@dataclass(frozen=True)
class ForestModel:
    trees: TreeEnsemble

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.trees.tree_mean(X)


@dataclass(frozen=True)
class BoostedModel:
    base: float
    trees: TreeEnsemble  # leaf values already multiplied by the learning rate

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.base + self.trees.tree_sum(X)


def fit_forest(X, y, n_trees=100, max_depth=0, min_leaf=1, bootstrap=True, seed=0) -> ForestModel:
    rng = np.random.default_rng(seed)
    n = len(y)
    order = presort(X)
    ones = np.ones(n)
    trees = []
    for _ in range(n_trees):
        if bootstrap:
            w = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
        else:
            w = ones
        trees.append(build_tree(X, y, w, order, max_depth, float(min_leaf)))
    return ForestModel(TreeEnsemble.concat(trees))


def fit_boosted(X, y, n_rounds=100, learning_rate=0.1, max_depth=3, min_leaf=1,
                return_losses=False):
    """Least-squares boosting from the target mean; optionally returns per-round train MSE."""
    order = presort(X)
    w = np.ones(len(y))
    base = float(np.mean(y))
    pred = np.full(len(y), base)
    losses = [float(np.mean((y - pred) ** 2))]
    trees = []
    for _ in range(n_rounds):
        resid = y - pred
        feature, threshold, left, right, value = build_tree(X, resid, w, order, max_depth,
                                                            float(min_leaf))
        tree = (feature, threshold, left, right, value * learning_rate)
        trees.append(tree)
        pred = pred + TreeEnsemble.concat([tree]).tree_sum(X)
        losses.append(float(np.mean((y - pred) ** 2)))
    model = BoostedModel(base, TreeEnsemble.concat(trees))
    return (model, losses) if return_losses else model
