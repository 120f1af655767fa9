"""Deterministic gradient-boosted regression trees, squared error.

Everything lives in-repo so attribution can be exact: no subsampling,
no randomness, first-order residual fitting with exact greedy split
search. Rows are put into a canonical order before training, so the
model is bit-identical across reruns and row permutations. Split
candidates are midpoints between consecutive distinct sorted feature
values; equal-gain ties resolve to the lower feature index, then the
lower threshold.

Missing feature values are not imputed: training uses complete rows
only, and every internal node carries a default direction (the side
that received more training rows, ties left) used to route missing
values at prediction time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError
from .features import FeatureMatrix, FeatureVector

SCHEMA_VERSION = 1


@dataclass
class GBTParams:
    n_trees: int = 200
    max_depth: int = 3
    learning_rate: float = 0.05
    min_samples_leaf: int = 5
    min_gain: float = 0.0

    def problems(self) -> list[str]:
        out = []
        if self.n_trees < 1:
            out.append(f"n_trees={self.n_trees} must be >= 1")
        if self.max_depth < 1:
            out.append(f"max_depth={self.max_depth} must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            out.append(f"learning_rate={self.learning_rate} outside (0, 1]")
        if self.min_samples_leaf < 1:
            out.append(f"min_samples_leaf={self.min_samples_leaf} must be >= 1")
        if self.min_gain < 0.0:
            out.append(f"min_gain={self.min_gain} must be >= 0")
        return out

    def validate(self) -> None:
        problems = self.problems()
        if problems:
            raise DataError("bad GBT params: " + "; ".join(problems))


@dataclass
class TreeNode:
    """Internal node (feature is set) or leaf (feature is None).

    ``n_samples`` is the training-row count reaching the node; the
    attribution module uses these as path-proportion weights.
    """

    n_samples: int
    value: float = 0.0
    feature: int | None = None
    threshold: float = 0.0
    default_left: bool = True
    left: TreeNode | None = None
    right: TreeNode | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class GBTModel:
    base_value: float
    learning_rate: float
    feature_names: list[str]
    trees: list[TreeNode]
    training_mse: list[float] = field(default_factory=list, repr=False, compare=False)

    def predict(self, x: FeatureVector | dict) -> float:
        return predict(self, x)


def _grow(x: np.ndarray, resid: np.ndarray, idx: np.ndarray, depth: int, params: GBTParams) -> TreeNode:
    node_n = len(idx)
    node_sum = float(resid[idx].sum())
    leaf = TreeNode(n_samples=node_n, value=node_sum / node_n)
    if depth >= params.max_depth or node_n < 2 * params.min_samples_leaf:
        return leaf

    best_gain = -np.inf
    best: tuple[int, float] | None = None
    parent_term = node_sum * node_sum / node_n
    for j in range(x.shape[1]):
        vals = x[idx, j]
        srt = np.argsort(vals, kind="stable")
        v = vals[srt]
        csum = np.cumsum(resid[idx][srt])
        n_left = np.arange(1, node_n)
        cand = (
            (v[:-1] < v[1:])
            & (n_left >= params.min_samples_leaf)
            & ((node_n - n_left) >= params.min_samples_leaf)
        )
        if not cand.any():
            continue
        s_left = csum[:-1]
        gain = np.where(
            cand,
            s_left**2 / n_left + (node_sum - s_left) ** 2 / (node_n - n_left) - parent_term,
            -np.inf,
        )
        b = int(np.argmax(gain))  # first max: lowest threshold wins ties
        if gain[b] > best_gain:  # strict: lower feature index wins ties
            thr = (v[b] + v[b + 1]) / 2.0
            if thr <= v[b]:  # adjacent floats can collapse the midpoint
                thr = float(v[b + 1])
            best_gain = float(gain[b])
            best = (j, float(thr))

    if best is None or best_gain <= params.min_gain:
        return leaf
    j, thr = best
    left_mask = x[idx, j] < thr
    left_idx = idx[left_mask]
    right_idx = idx[~left_mask]
    node = TreeNode(
        n_samples=node_n,
        feature=j,
        threshold=thr,
        default_left=len(left_idx) >= len(right_idx),
        left=_grow(x, resid, left_idx, depth + 1, params),
        right=_grow(x, resid, right_idx, depth + 1, params),
    )
    return node


def _predict_rows(root: TreeNode, x: np.ndarray) -> np.ndarray:
    out = np.empty(len(x))
    stack: list[tuple[TreeNode, np.ndarray]] = [(root, np.arange(len(x)))]
    while stack:
        node, rows = stack.pop()
        if node.is_leaf:
            out[rows] = node.value
            continue
        vals = x[rows, node.feature]
        go_left = vals < node.threshold
        if node.default_left:
            go_left |= np.isnan(vals)
        stack.append((node.left, rows[go_left]))
        stack.append((node.right, rows[~go_left]))
    return out


def train(m: FeatureMatrix, params: GBTParams | None = None) -> GBTModel:
    """Fit the boosted ensemble on the matrix's complete rows.

    Tree k fits the residuals of the ensemble after k-1 trees; leaf
    values are mean residuals, so training MSE is non-increasing.
    Boosting stops early once no tree can improve (all-constant
    residuals), and an all-constant target yields a base-value-only
    model with zero trees.
    """
    params = params or GBTParams()
    params.validate()
    x_all, y_all = m.to_arrays()
    complete = ~np.isnan(x_all).any(axis=1)
    x, y = x_all[complete], y_all[complete]
    n = len(y)
    if n < 2 * params.min_samples_leaf:
        raise DataError(
            f"too few complete rows: {n} < 2 * min_samples_leaf = {2 * params.min_samples_leaf}"
        )

    # Canonical row order makes float sums permutation invariant.
    keys = (y,) + tuple(x[:, j] for j in range(x.shape[1] - 1, -1, -1))
    order = np.lexsort(keys)
    x, y = x[order], y[order]

    base = float(y.mean())
    model = GBTModel(base, params.learning_rate, list(m.feature_names), [])
    pred = np.full(n, base)
    model.training_mse.append(float(np.mean((y - pred) ** 2)))
    if np.all(y == y[0]):
        return model
    all_idx = np.arange(n)
    for _ in range(params.n_trees):
        resid = y - pred
        root = _grow(x, resid, all_idx, 0, params)
        if root.is_leaf:
            break
        model.trees.append(root)
        pred = pred + params.learning_rate * _predict_rows(root, x)
        model.training_mse.append(float(np.mean((y - pred) ** 2)))
    return model


def _route(node: TreeNode, row: np.ndarray) -> float:
    while not node.is_leaf:
        v = row[node.feature]
        if np.isnan(v):
            node = node.left if node.default_left else node.right
        else:
            node = node.left if v < node.threshold else node.right
    return node.value


def row_from_features(x: FeatureVector | dict, feature_names: list[str]) -> np.ndarray:
    values = x.values if isinstance(x, FeatureVector) else x
    unknown = sorted(set(values) - set(feature_names))
    if unknown:
        raise DataError(f"unknown feature names: {unknown}")
    row = np.full(len(feature_names), np.nan)
    for j, name in enumerate(feature_names):
        v = values.get(name)
        if v is not None:
            row[j] = v
    return row


def predict(model: GBTModel, x: FeatureVector | dict) -> float:
    """base_value + learning_rate * sum of routed leaf values.

    Missing fields follow each node's default direction; feature names
    absent from the model are fatal.
    """
    row = row_from_features(x, model.feature_names)
    return model.base_value + model.learning_rate * sum(_route(t, row) for t in model.trees)


def predict_matrix(model: GBTModel, m: FeatureMatrix) -> np.ndarray:
    if m.feature_names != model.feature_names:
        raise DataError(
            f"matrix features {m.feature_names} do not match model features {model.feature_names}"
        )
    x, _ = m.to_arrays()
    out = np.full(len(x), model.base_value)
    for tree in model.trees:
        out += model.learning_rate * _predict_rows(tree, x)
    return out


def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"n": node.n_samples, "value": node.value}
    return {
        "n": node.n_samples,
        "feature": node.feature,
        "threshold": node.threshold,
        "default_left": node.default_left,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(data: dict) -> TreeNode:
    if "value" in data:
        return TreeNode(n_samples=int(data["n"]), value=float(data["value"]))
    return TreeNode(
        n_samples=int(data["n"]),
        feature=int(data["feature"]),
        threshold=float(data["threshold"]),
        default_left=bool(data["default_left"]),
        left=_node_from_dict(data["left"]),
        right=_node_from_dict(data["right"]),
    )


def save_model(model: GBTModel, path: str | Path) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "base_value": model.base_value,
        "learning_rate": model.learning_rate,
        "feature_names": model.feature_names,
        "trees": [_node_to_dict(t) for t in model.trees],
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path: str | Path) -> GBTModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise DataError(f"malformed model file {path}: missing schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise DataError(
            f"model schema version mismatch: file has {doc['schema_version']}, "
            f"supported is {SCHEMA_VERSION}"
        )
    try:
        return GBTModel(
            base_value=float(doc["base_value"]),
            learning_rate=float(doc["learning_rate"]),
            feature_names=list(doc["feature_names"]),
            trees=[_node_from_dict(t) for t in doc["trees"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed model file {path}: {exc}") from exc
