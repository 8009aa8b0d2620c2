"""Random forest classifier: bagged CART trees, Gini impurity, MDI importances.

Written from scratch on top of the compiled kernels in _cart.  Models are
immutable after training and safe to share across threads; prediction is
pure.  Per-tree randomness comes from substreams of the forest seed, so
equal (data, params, seed) always yields a byte-identical serialized model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from dga_sentinel import _cart
from dga_sentinel.errors import (
    CorruptDocumentError,
    DegenerateDataError,
    SchemaVersionMismatchError,
    ShapeMismatchError,
)
from dga_sentinel.rng import derive_substream

FOREST_SCHEMA_VERSION = 1


@dataclass(frozen=True, slots=True)
class ForestParams:
    """Training knobs; defaults follow common random-forest practice."""

    n_trees: int = 100
    max_depth: int | None = None
    features_per_split: int | None = None  # None: floor(sqrt(n_features))
    min_samples_split: int = 2
    bootstrap: bool = True
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be None or >= 0")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be None or >= 1")


@dataclass(frozen=True, slots=True, eq=False)
class DecisionTree:
    """Flat node arrays in preorder; feature[i] < 0 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray  # (n_nodes, n_classes) training samples per class

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])


@dataclass(frozen=True, slots=True, eq=False)
class Forest:
    """A trained ensemble plus its metadata and normalized importances."""

    trees: tuple[DecisionTree, ...]
    params: ForestParams
    feature_names: tuple[str, ...]
    class_labels: tuple[str, ...]
    importances: np.ndarray  # per feature, sums to 1 (all zero if no splits)
    _packed: tuple = field(default=None, repr=False, compare=False)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


@dataclass(frozen=True, slots=True)
class Prediction:
    label: str
    class_probabilities: dict[str, float]


def resolve_features_per_split(params: ForestParams, n_features: int) -> int:
    if params.features_per_split is not None:
        return min(params.features_per_split, n_features)
    return max(1, int(math.floor(math.sqrt(n_features))))


def _as_matrix(X) -> np.ndarray:
    arr = np.ascontiguousarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatchError(f"feature matrix must be 2-D, got shape {arr.shape}")
    return arr


def train_forest(
    X,
    y: Sequence,
    params: ForestParams | None = None,
    feature_names: Sequence[str] | None = None,
) -> Forest:
    """Fit a forest on matrix X and labels y.

    Labels may be any hashable values; they are stringified and ordered
    lexicographically, and that order defines probability columns and
    argmax tie-breaking.  Each tree gets its own substream of rng_seed,
    draws its bootstrap sample from it, then its per-node feature subsets.
    """
    params = params or ForestParams()
    X = _as_matrix(X)
    n, p = X.shape
    labels = [str(v) for v in y]
    if len(labels) != n:
        raise ShapeMismatchError(f"X has {n} rows but y has {len(labels)} labels")
    if n < 2:
        raise ShapeMismatchError("need at least 2 training samples")
    if np.isnan(X).any():
        raise DegenerateDataError("feature matrix contains NaN")
    class_labels = tuple(sorted(set(labels)))
    if len(class_labels) < 2:
        raise DegenerateDataError("training labels contain a single class")
    if feature_names is None:
        names = tuple(f"f{i}" for i in range(p))
    else:
        names = tuple(feature_names)
        if len(names) != p:
            raise ShapeMismatchError(f"{len(names)} feature names for {p} columns")

    label_index = {lab: i for i, lab in enumerate(class_labels)}
    y_idx = np.array([label_index[lab] for lab in labels], dtype=np.int64)
    k = resolve_features_per_split(params, p)
    depth = -1 if params.max_depth is None else params.max_depth

    trees: list[DecisionTree] = []
    importance_sum = np.zeros(p, dtype=np.float64)
    for t in range(params.n_trees):
        seed = np.uint64(derive_substream(params.rng_seed, t))
        feat, thr, left, right, counts, imp, _ = _cart.grow_tree(
            X,
            y_idx,
            len(class_labels),
            seed,
            params.bootstrap,
            k,
            params.min_samples_split,
            depth,
        )
        trees.append(DecisionTree(feat, thr, left, right, counts))
        importance_sum += imp

    total = importance_sum.sum()
    importances = importance_sum / total if total > 0 else np.zeros(p)
    return Forest(
        trees=tuple(trees),
        params=params,
        feature_names=names,
        class_labels=class_labels,
        importances=importances,
        _packed=_pack(trees, len(class_labels)),
    )


def _pack(trees: Iterable[DecisionTree], n_classes: int) -> tuple:
    """Concatenate tree arrays with child links rebased to absolute ids."""
    feats, thrs, lefts, rights, probs, offsets = [], [], [], [], [], []
    base = 0
    for tree in trees:
        offsets.append(base)
        feats.append(tree.feature)
        thrs.append(tree.threshold)
        shifted_l = np.where(tree.left >= 0, tree.left + base, -1)
        shifted_r = np.where(tree.right >= 0, tree.right + base, -1)
        lefts.append(shifted_l)
        rights.append(shifted_r)
        row_tot = tree.counts.sum(axis=1, keepdims=True)
        probs.append(tree.counts / np.maximum(row_tot, 1))
        base += tree.n_nodes
    return (
        np.concatenate(feats),
        np.concatenate(thrs),
        np.concatenate(lefts),
        np.concatenate(rights),
        np.ascontiguousarray(np.concatenate(probs), dtype=np.float64),
        np.array(offsets, dtype=np.int64),
        n_classes,
    )


def predict_batch(forest: Forest, X) -> tuple[list[str], np.ndarray]:
    """Labels and the (n, n_classes) probability matrix for each row of X."""
    X = _as_matrix(X)
    if X.shape[1] != forest.n_features:
        raise ShapeMismatchError(
            f"model expects {forest.n_features} features, got {X.shape[1]}"
        )
    packed = forest._packed or _pack(forest.trees, len(forest.class_labels))
    probs = _cart.predict_forest(X, *packed)
    labels = [forest.class_labels[i] for i in np.argmax(probs, axis=1)]
    return labels, probs


def predict(forest: Forest, x) -> Prediction:
    """Classify a single vector (ndarray or FeatureVector)."""
    values = getattr(x, "values", x)
    arr = np.asarray(values, dtype=np.float64).reshape(1, -1)
    labels, probs = predict_batch(forest, arr)
    return Prediction(
        label=labels[0],
        class_probabilities={
            lab: float(p) for lab, p in zip(forest.class_labels, probs[0])
        },
    )


def feature_importance(forest: Forest) -> dict[str, float]:
    """Mean-decrease-impurity importances scaled to percentages."""
    return {
        name: float(v) * 100.0
        for name, v in zip(forest.feature_names, forest.importances)
    }


# ---------------------------------------------------------------------------
# serialization


def _params_to_doc(params: ForestParams) -> dict:
    return {
        "n_trees": params.n_trees,
        "max_depth": params.max_depth,
        "features_per_split": params.features_per_split,
        "min_samples_split": params.min_samples_split,
        "bootstrap": params.bootstrap,
        "rng_seed": params.rng_seed,
    }


def serialize_model(forest: Forest) -> bytes:
    """Canonical JSON bytes; equal forests serialize byte-identically."""
    doc = {
        "schema_version": FOREST_SCHEMA_VERSION,
        "kind": "forest",
        "params": _params_to_doc(forest.params),
        "feature_names": list(forest.feature_names),
        "class_labels": list(forest.class_labels),
        "importances": [float(v) for v in forest.importances],
        "trees": [
            {
                "feature": tree.feature.tolist(),
                "threshold": tree.threshold.tolist(),
                "left": tree.left.tolist(),
                "right": tree.right.tolist(),
                "counts": tree.counts.tolist(),
            }
            for tree in forest.trees
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("ascii")


def deserialize_model(data: bytes) -> Forest:
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptDocumentError(f"model document is not valid JSON: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise CorruptDocumentError("model document is not a JSON object")
    version = doc.get("schema_version")
    if version != FOREST_SCHEMA_VERSION:
        raise SchemaVersionMismatchError(
            f"expected schema_version {FOREST_SCHEMA_VERSION}, got {version!r}"
        )
    try:
        if doc["kind"] != "forest":
            raise CorruptDocumentError(f"not a forest document: kind={doc['kind']!r}")
        params = ForestParams(**doc["params"])
        trees = tuple(
            DecisionTree(
                feature=np.array(t["feature"], dtype=np.int64),
                threshold=np.array(t["threshold"], dtype=np.float64),
                left=np.array(t["left"], dtype=np.int64),
                right=np.array(t["right"], dtype=np.int64),
                counts=np.array(t["counts"], dtype=np.int64).reshape(
                    len(t["feature"]), len(doc["class_labels"])
                ),
            )
            for t in doc["trees"]
        )
        forest = Forest(
            trees=trees,
            params=params,
            feature_names=tuple(doc["feature_names"]),
            class_labels=tuple(doc["class_labels"]),
            importances=np.array(doc["importances"], dtype=np.float64),
            _packed=_pack(trees, len(doc["class_labels"])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptDocumentError(f"malformed forest document: {exc}") from exc
    if len(forest.trees) != params.n_trees:
        raise CorruptDocumentError(
            f"document declares {params.n_trees} trees but carries {len(forest.trees)}"
        )
    return forest
