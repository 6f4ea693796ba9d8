"""Deterministic CART trees and random forests (regression and classification).

Kept deliberately small: greedy binary splits on axis-aligned thresholds,
variance reduction for regression and Gini for classification, bootstrap
resampling and per-node feature subsampling.  Every tree draws its randomness
from a seed spawned off the forest seed by tree index, so training is
reproducible and independent of any thread scheduling.

Regression leaves predict the mean of the training targets routed to them;
classification leaves predict the majority class (ties toward the lower class
index).  Importances are mean decrease in impurity, normalized to sum to 1
when any split exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_LEAF = -1


@dataclass
class DecisionTree:
    mode: str  # "regression" | "classification"
    max_depth: int = 12
    min_samples_leaf: int = 1
    max_features: object = "sqrt"  # "sqrt", "all", int, or float fraction
    n_classes: int = 0
    feature: list = field(default_factory=list)
    threshold: list = field(default_factory=list)
    left: list = field(default_factory=list)
    right: list = field(default_factory=list)
    value: list = field(default_factory=list)
    importances: np.ndarray | None = None

    def _n_candidate_features(self, d):
        if self.max_features == "all" or self.max_features is None:
            return d
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(d)))
        if isinstance(self.max_features, float):
            return max(1, int(self.max_features * d))
        return max(1, min(int(self.max_features), d))

    def fit(self, X, y, rng):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        self.feature, self.threshold = [], []
        self.left, self.right, self.value = [], [], []
        self.importances = np.zeros(X.shape[1])
        if self.mode == "classification":
            self.n_classes = int(y.max()) + 1 if len(y) else 1
        self._build(X, y, np.arange(len(y)), 0, rng)
        return self

    # -- impurity helpers ---------------------------------------------------

    def _node_impurity_sum(self, y_idx):
        # total impurity * n: SSE for regression, n * gini for classification
        if self.mode == "regression":
            return float(np.sum((y_idx - y_idx.mean()) ** 2)) if len(y_idx) else 0.0
        counts = np.bincount(y_idx, minlength=self.n_classes).astype(float)
        n = counts.sum()
        return float(n - counts @ counts / n) if n else 0.0

    def _leaf_value(self, y_idx):
        if self.mode == "regression":
            return float(y_idx.mean())
        counts = np.bincount(y_idx, minlength=self.n_classes)
        return int(np.argmax(counts))  # argmax takes the lowest tied index

    # -- growing ------------------------------------------------------------

    def _build(self, X, y, idx, depth, rng):
        node = len(self.feature)
        self.feature.append(_LEAF)
        self.threshold.append(0.0)
        self.left.append(_LEAF)
        self.right.append(_LEAF)
        self.value.append(None)

        y_node = y[idx]
        parent_imp = self._node_impurity_sum(y_node)
        if (depth >= self.max_depth or len(idx) < 2 * self.min_samples_leaf
                or parent_imp <= 0.0):
            self.value[node] = self._leaf_value(y_node)
            return node

        d = X.shape[1]
        k = self._n_candidate_features(d)
        feats = np.sort(rng.choice(d, size=k, replace=False))
        best = self._best_split(X, y, idx, feats)
        if best is None and k < d:
            # the sampled features were constant on this node; keep searching
            # the remaining ones instead of degenerating into a leaf
            rest = np.setdiff1d(np.arange(d), feats)
            best = self._best_split(X, y, idx, rest)
        if best is None:
            self.value[node] = self._leaf_value(y_node)
            return node

        f, thr, child_imp = best
        self.importances[f] += parent_imp - child_imp
        go_left = X[idx, f] <= thr
        left_idx, right_idx = idx[go_left], idx[~go_left]
        self.feature[node] = int(f)
        self.threshold[node] = float(thr)
        self.value[node] = self._leaf_value(y_node)  # kept for truncated descent
        self.left[node] = self._build(X, y, left_idx, depth + 1, rng)
        self.right[node] = self._build(X, y, right_idx, depth + 1, rng)
        return node

    def _best_split(self, X, y, idx, feats):
        min_leaf = self.min_samples_leaf
        n = len(idx)
        best = None  # (child impurity sum, feature, threshold)
        y_node = y[idx]
        if self.mode == "classification":
            onehot = np.zeros((n, self.n_classes))
            onehot[np.arange(n), y_node] = 1.0
        for f in feats:
            xs = X[idx, f]
            order = np.argsort(xs, kind="mergesort")
            xs_o = xs[order]
            valid = xs_o[1:] != xs_o[:-1]
            pos = np.arange(1, n)
            valid &= (pos >= min_leaf) & (n - pos >= min_leaf)
            if not valid.any():
                continue
            nl = pos.astype(float)
            nr = n - nl
            if self.mode == "regression":
                ys = y_node[order].astype(float)
                cs = np.cumsum(ys)[:-1]
                total = float(np.sum(ys))
                sq = float(np.sum(ys ** 2))
                child = sq - (cs ** 2 / nl + (total - cs) ** 2 / nr)
            else:
                oh = onehot[order]
                cl = np.cumsum(oh, axis=0)[:-1]
                totals = np.sum(oh, axis=0)
                cr = totals[None, :] - cl
                child = (nl - np.sum(cl ** 2, axis=1) / nl) + \
                        (nr - np.sum(cr ** 2, axis=1) / nr)
            child = np.where(valid, child, np.inf)
            i = int(np.argmin(child))
            if math.isinf(child[i]):
                continue
            thr = 0.5 * (xs_o[i] + xs_o[i + 1])
            cand = (float(child[i]), int(f), float(thr))
            if best is None or cand < best:
                best = cand
        if best is None:
            return None
        child_imp, f, thr = best
        return f, thr, child_imp

    # -- prediction ---------------------------------------------------------

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        feature = np.asarray(self.feature)
        threshold = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        node = np.zeros(len(X), dtype=np.int64)
        while True:
            f = feature[node]
            internal = f >= 0
            if not internal.any():
                break
            rows = np.nonzero(internal)[0]
            go_left = X[rows, f[internal]] <= threshold[node[internal]]
            node[rows] = np.where(go_left, left[node[internal]],
                                  right[node[internal]])
        vals = [self.value[i] for i in node]
        return np.asarray(vals)

    def to_dict(self):
        return {
            "mode": self.mode,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "n_classes": self.n_classes,
            "feature": list(map(int, self.feature)),
            "threshold": list(map(float, self.threshold)),
            "left": list(map(int, self.left)),
            "right": list(map(int, self.right)),
            "value": [v if isinstance(v, int) else float(v) for v in self.value],
            "importances": [float(v) for v in self.importances],
        }

    @classmethod
    def from_dict(cls, d):
        tree = cls(mode=d["mode"], max_depth=d["max_depth"],
                   min_samples_leaf=d["min_samples_leaf"],
                   max_features=d["max_features"], n_classes=d["n_classes"])
        tree.feature = d["feature"]
        tree.threshold = d["threshold"]
        tree.left = d["left"]
        tree.right = d["right"]
        tree.value = [int(v) if d["mode"] == "classification" else float(v)
                      for v in d["value"]]
        tree.importances = np.array(d["importances"])
        return tree


@dataclass
class RandomForest:
    mode: str
    n_trees: int = 200
    max_depth: int = 12
    min_samples_leaf: int = 1
    max_features: object = "sqrt"
    bootstrap: bool = True
    seed: int = 0
    trees: list = field(default_factory=list)
    n_classes: int = 0

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        if self.mode == "classification":
            self.n_classes = int(y.max()) + 1 if len(y) else 1
        self.trees = []
        seeds = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        for ss in seeds:
            rng = np.random.default_rng(ss)
            if self.bootstrap:
                idx = rng.integers(0, len(y), size=len(y))
            else:
                idx = np.arange(len(y))
            tree = DecisionTree(mode=self.mode, max_depth=self.max_depth,
                                min_samples_leaf=self.min_samples_leaf,
                                max_features=self.max_features,
                                n_classes=self.n_classes)
            tree.fit(X[idx], y[idx], rng)
            self.trees.append(tree)
        return self

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        preds = np.stack([t.predict(X) for t in self.trees])
        if self.mode == "regression":
            return preds.mean(axis=0)
        # majority vote across trees, ties toward the lower class index
        out = np.empty(X.shape[0], dtype=np.int64)
        for i in range(X.shape[0]):
            out[i] = np.argmax(np.bincount(preds[:, i].astype(int),
                                           minlength=self.n_classes))
        return out

    @property
    def feature_importances_(self):
        total = np.sum([t.importances for t in self.trees], axis=0)
        s = total.sum()
        return total / s if s > 0 else total

    def to_dict(self):
        return {
            "mode": self.mode,
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
            "n_classes": self.n_classes,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d):
        forest = cls(mode=d["mode"], n_trees=d["n_trees"],
                     max_depth=d["max_depth"],
                     min_samples_leaf=d["min_samples_leaf"],
                     max_features=d["max_features"], bootstrap=d["bootstrap"],
                     seed=d["seed"], n_classes=d["n_classes"])
        forest.trees = [DecisionTree.from_dict(t) for t in d["trees"]]
        return forest
