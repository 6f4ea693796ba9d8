"""Models mapping feature vectors to configuration choices.

Four model kinds cover the regressor / classifier / ranker taxonomy:

* ``reg_forest``   one regression forest per configuration, trained on
                   log-scaled relative times; selection is the argmin of the
                   predicted labels.
* ``clf_forest``   a classification forest on the best-config label.
* ``knn``          nearest neighbours on standardized features.
* ``pair_ranker``  one classification forest over (features, pair indicator)
                   predicting which configuration of the pair is faster;
                   selection is the Copeland winner.

Labels are log-scaled relative to Default: label(x, c) =
ln((t(x, c) + shift) / (t(x, Default) + shift)), so Default is the zero point
and the labels are scale-free.  All ties break toward Default, then
lexicographically.

Training is deterministic given (examples, hyperparams, seed) and refuses
example sets whose families intersect a declared test registry, which makes
leaking permutations of test problems into training a hard error.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .forest import RandomForest
from .metrics import DEFAULT_SHIFT, ConfigId, shifted_geomean

MODEL_KINDS = ("reg_forest", "clf_forest", "knn", "pair_ranker")

MODEL_FORMAT_TAG = "benloc-model-v1"

FOREST_DEFAULTS = {
    "n_trees": 200,
    "max_depth": 12,
    "max_features": "sqrt",
    "min_samples_leaf": 1,
    "bootstrap": True,
}

KNN_DEFAULTS = {"k": 5}


class FingerprintMismatchError(ValueError):
    """Predict-time features laid out differently than at training time."""


class TrainTestContaminationError(ValueError):
    """Training examples from families registered as test families."""


class UnsupportedModelError(TypeError):
    pass


def feature_fingerprint(names):
    digest = hashlib.sha256("\n".join(names).encode("utf-8")).hexdigest()
    return digest[:16]


@dataclass
class LabeledExample:
    family: str
    seed: int
    feature_names: tuple
    features: np.ndarray
    configs: tuple  # of ConfigId, Default first
    labels: np.ndarray  # log-scaled relative times, aligned with configs
    times: np.ndarray  # raw capped times, aligned with configs

    def __post_init__(self):
        self.feature_names = tuple(self.feature_names)
        self.configs = tuple(self.configs)
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        self.times = np.asarray(self.times, dtype=float)
        if len(self.labels) != len(self.configs):
            raise ValueError("label vector length != number of configurations")

    @property
    def class_index(self):
        # argmin of raw times; configs are Default-first so argmin's
        # first-minimum rule is the documented tie-break
        return int(np.argmin(self.times))

    @property
    def fingerprint(self):
        return feature_fingerprint(self.feature_names)


def make_labels(perf, shift=DEFAULT_SHIFT):
    """Per-config label vectors ln((t + shift) / (t_default + shift)).

    Returns (configs, {(family, seed): labels}); raises on missing entries.
    """
    configs = tuple(perf.configs())
    default = ConfigId.default()
    if default not in configs:
        raise ValueError("performance table lacks Default")
    out = {}
    for f, s in perf.instances():
        t_def = perf.time(f, s, default)
        out[(f, s)] = np.array([
            math.log((perf.time(f, s, c) + shift) / (t_def + shift))
            for c in configs])
    return configs, out


def build_examples(perf, feature_map, shift=DEFAULT_SHIFT):
    """Join a performance table with per-instance features.

    feature_map: {(family, seed): (names, values)}.
    """
    configs, labels = make_labels(perf, shift)
    examples = []
    for f, s in perf.instances():
        if (f, s) not in feature_map:
            raise KeyError(f"no features for ({f}, {s})")
        names, values = feature_map[(f, s)]
        times = np.array([perf.time(f, s, c) for c in configs])
        examples.append(LabeledExample(
            family=f, seed=s, feature_names=tuple(names), features=values,
            configs=configs, labels=labels[(f, s)], times=times))
    return examples


@dataclass
class TrainedSelector:
    kind: str
    configs: tuple
    feature_names: tuple
    fingerprint: str
    seed: int
    hyperparams: dict
    payload: dict  # kind-specific learned state

    def to_json(self):
        payload = {}
        for key, val in self.payload.items():
            if isinstance(val, RandomForest):
                payload[key] = {"__forest__": val.to_dict()}
            elif isinstance(val, np.ndarray):
                payload[key] = {"__array__": val.tolist()}
            else:
                payload[key] = val
        return json.dumps({
            "format": MODEL_FORMAT_TAG,
            "kind": self.kind,
            "configs": [str(c) for c in self.configs],
            "feature_names": list(self.feature_names),
            "fingerprint": self.fingerprint,
            "seed": self.seed,
            "hyperparams": self.hyperparams,
            "payload": payload,
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        if d.get("format") != MODEL_FORMAT_TAG:
            raise ValueError(f"unknown model format {d.get('format')!r}")
        payload = {}
        for key, val in d["payload"].items():
            if isinstance(val, dict) and "__forest__" in val:
                payload[key] = RandomForest.from_dict(val["__forest__"])
            elif isinstance(val, dict) and "__array__" in val:
                payload[key] = np.array(val["__array__"])
            else:
                payload[key] = val
        return cls(kind=d["kind"],
                   configs=tuple(ConfigId.parse(c) for c in d["configs"]),
                   feature_names=tuple(d["feature_names"]),
                   fingerprint=d["fingerprint"], seed=d["seed"],
                   hyperparams=d["hyperparams"], payload=payload)


def _forest_params(hyperparams):
    params = dict(FOREST_DEFAULTS)
    params.update({k: v for k, v in (hyperparams or {}).items()
                   if k in FOREST_DEFAULTS})
    return params


def _pair_features(X, n_pairs, pair_idx):
    ind = np.zeros((X.shape[0], n_pairs))
    ind[:, pair_idx] = 1.0
    return np.hstack([X, ind])


def train(kind, examples, hyperparams=None, seed=0, test_registry=None):
    """Fit a TrainedSelector. Deterministic given (examples, hyperparams, seed)."""
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    if len(examples) < 2:
        raise ValueError("need at least 2 training examples")
    if test_registry:
        bad = sorted({ex.family for ex in examples} & set(test_registry))
        if bad:
            raise TrainTestContaminationError(
                f"training examples from registered test families: {bad}")

    fp = examples[0].fingerprint
    configs = examples[0].configs
    for ex in examples:
        if ex.fingerprint != fp or ex.configs != configs:
            raise ValueError("examples disagree on feature order or configs")

    X = np.stack([ex.features for ex in examples])
    labels = np.stack([ex.labels for ex in examples])
    classes = np.array([ex.class_index for ex in examples])
    hp = dict(hyperparams or {})
    payload = {}

    if kind == "reg_forest":
        params = _forest_params(hp)
        seeds = np.random.SeedSequence(seed).spawn(len(configs))
        for k, cfg in enumerate(configs):
            forest = RandomForest(mode="regression",
                                  seed=int(seeds[k].generate_state(1)[0]),
                                  **params)
            forest.fit(X, labels[:, k])
            payload[f"forest_{k}"] = forest
    elif kind == "clf_forest":
        params = _forest_params(hp)
        forest = RandomForest(mode="classification", seed=seed, **params)
        # class labels must span all configs for a stable vote layout
        forest.n_classes = len(configs)
        forest.fit(X, classes)
        forest.n_classes = len(configs)
        payload["forest"] = forest
    elif kind == "knn":
        k = int(hp.get("k", KNN_DEFAULTS["k"]))
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std[std == 0] = 1.0
        payload["k"] = min(k, len(examples))
        payload["mean"] = mean
        payload["std"] = std
        payload["X"] = (X - mean) / std
        payload["classes"] = classes
    elif kind == "pair_ranker":
        pairs = [(i, j) for i in range(len(configs))
                 for j in range(i + 1, len(configs))]
        n_pairs = len(pairs)
        blocks, targets = [], []
        for p, (i, j) in enumerate(pairs):
            blocks.append(_pair_features(X, n_pairs, p))
            # class 1: config j strictly faster than config i
            targets.append((labels[:, j] < labels[:, i]).astype(int))
        params = _forest_params(hp)
        forest = RandomForest(mode="classification", seed=seed, **params)
        forest.fit(np.vstack(blocks), np.concatenate(targets))
        forest.n_classes = 2
        payload["forest"] = forest
        payload["pairs"] = [[i, j] for i, j in pairs]

    return TrainedSelector(kind=kind, configs=configs,
                           feature_names=examples[0].feature_names,
                           fingerprint=fp, seed=seed, hyperparams=hp,
                           payload=payload)


def predict_config(model, features, feature_names=None):
    """Select a configuration for one feature vector."""
    if feature_names is not None:
        if feature_fingerprint(feature_names) != model.fingerprint:
            raise FingerprintMismatchError("feature layout differs from training")
    features = np.asarray(features, dtype=float)
    if features.shape != (len(model.feature_names),):
        raise FingerprintMismatchError(
            f"expected {len(model.feature_names)} features, got {features.shape}")
    configs = model.configs

    if model.kind == "reg_forest":
        preds = np.array([
            model.payload[f"forest_{k}"].predict(features[None, :])[0]
            for k in range(len(configs))])
        return configs[int(np.argmin(preds))]  # first minimum: Default tie-break
    if model.kind == "clf_forest":
        cls = int(model.payload["forest"].predict(features[None, :])[0])
        return configs[cls]
    if model.kind == "knn":
        z = (features - model.payload["mean"]) / model.payload["std"]
        dists = np.linalg.norm(model.payload["X"] - z, axis=1)
        order = np.argsort(dists, kind="mergesort")[: model.payload["k"]]
        votes = np.bincount(np.asarray(model.payload["classes"])[order],
                            minlength=len(configs))
        return configs[int(np.argmax(votes))]
    if model.kind == "pair_ranker":
        pairs = model.payload["pairs"]
        X_pair = _pair_features(np.tile(features, (len(pairs), 1)),
                                len(pairs), np.arange(len(pairs)))
        outcomes = model.payload["forest"].predict(X_pair)
        wins = np.zeros(len(configs))
        for (i, j), out in zip(pairs, outcomes):
            if out == 1:
                wins[j] += 1
            else:
                wins[i] += 1
        return configs[int(np.argmax(wins))]  # Copeland winner, Default tie-break
    raise UnsupportedModelError(model.kind)


def feature_importance(model):
    """Mean-decrease-in-impurity ranking; tree-based models only."""
    if model.kind == "reg_forest":
        per_config = [model.payload[f"forest_{k}"].feature_importances_
                      for k in range(len(model.configs))]
        total = np.mean(per_config, axis=0)
    elif model.kind == "clf_forest":
        total = model.payload["forest"].feature_importances_
    elif model.kind == "pair_ranker":
        # drop the pair-indicator block appended after the real features
        total = model.payload["forest"].feature_importances_[
            : len(model.feature_names)]
    else:
        raise UnsupportedModelError(
            f"{model.kind} has no impurity-based importances")
    s = total.sum()
    if s > 0:
        total = total / s
    ranked = sorted(zip(model.feature_names, total), key=lambda p: -p[1])
    return [(name, float(v)) for name, v in ranked]


DEFAULT_SEARCH_SPACE = {
    "n_trees": [50, 100, 200, 400],
    "max_depth": [4, 8, 12, 16],
    "min_samples_leaf": [1, 2, 4],
}


def random_search(kind, examples, search_space=None, budget=20, seed=0,
                  shift=DEFAULT_SHIFT, val_fraction=0.2):
    """Random hyperparameter search with an inner by-instance validation split.

    Scores each draw by the shifted geomean of the solve times of the
    configurations it selects on held-out families; returns
    (best_hyperparams, best_score).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    space = search_space or DEFAULT_SEARCH_SPACE
    rng = np.random.default_rng(seed)

    families = sorted({ex.family for ex in examples})
    if len(families) < 2:
        raise ValueError("need at least 2 families for the validation split")
    order = [families[i] for i in rng.permutation(len(families))]
    n_val = min(max(round(val_fraction * len(families)), 1), len(families) - 1)
    val_fams = set(order[:n_val])
    train_ex = [ex for ex in examples if ex.family not in val_fams]
    val_ex = [ex for ex in examples if ex.family in val_fams]

    best_params, best_score = None, None
    for trial in range(budget):
        params = {key: space[key][int(rng.integers(len(space[key])))]
                  for key in sorted(space)}
        model = train(kind, train_ex, hyperparams=params,
                      seed=seed * 100003 + trial,
                      test_registry=val_fams)
        chosen_times = []
        for ex in val_ex:
            cfg = predict_config(model, ex.features)
            chosen_times.append(ex.times[ex.configs.index(cfg)])
        score = shifted_geomean(chosen_times, shift)
        if best_score is None or score < best_score:
            best_params, best_score = params, score
    return best_params, best_score
