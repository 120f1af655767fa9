"""Exact Shapley attribution for the boosted-tree ensemble.

The set function being attributed is the tree-traversal expectation
with path-proportion weighting: masked features split the walk across
both children weighted by training-row counts, known features follow
the input's branch. Per tree, only features on a leaf's path can earn
credit from that leaf, and those number at most the tree depth, so the
Shapley sum is computed exactly leaf by leaf over tiny player sets.
``brute_force_shapley`` enumerates every feature subset of the whole
model with the identical masking rule and exists purely to validate
the fast path.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import DataError
from .features import FeatureMatrix, FeatureVector
from .gbt import GBTModel, TreeNode, row_from_features

BRUTE_FORCE_MAX_FEATURES = 15


@dataclass
class ShapVector:
    base: float
    contributions: dict[str, float]

    def total(self) -> float:
        return self.base + sum(self.contributions.values())


@dataclass
class ShapReport:
    ranking: list[tuple[str, float]]
    dependence: dict[str, list[tuple[float | None, float]]]


@dataclass
class _LeafPath:
    value: float
    features: list[int]  # distinct feature ids on the path
    node_dirs: list[list[tuple[int, bool]]]  # per feature: (node index, toward-left)
    ratios: list[float]  # per feature: product of cover ratios
    coef: list[list[float]]  # per a-pattern: per-feature Shapley coefficient


def _shapley_weight(s: int, m: int) -> float:
    return math.factorial(s) * math.factorial(m - s - 1) / math.factorial(m)


class _TreeAttributor:
    """Precomputed per-leaf Shapley coefficients for one tree.

    For a leaf with distinct path features D and cover-ratio products
    r_f, the sample enters only through match bits a_f (did the input
    follow the path at every node testing f). There are 2^|D| possible
    bit patterns, so the whole Shapley subset sum is tabulated per
    pattern up front and each sample reduces to table lookups.
    """

    def __init__(self, root: TreeNode):
        self.nodes: list[TreeNode] = []
        self.leaves: list[_LeafPath] = []
        self.expected = 0.0
        self._collect(root, [], root.n_samples)
        for leaf in self.leaves:
            leaf.coef = self._coefficients(leaf)

    def _collect(self, node: TreeNode, path: list[tuple[int, int, bool, float]], root_n: int):
        if node.is_leaf:
            feats: list[int] = []
            dirs: dict[int, list[tuple[int, bool]]] = {}
            rprod: dict[int, float] = {}
            for feature, node_ix, toward_left, step_ratio in path:
                if feature not in dirs:
                    feats.append(feature)
                    dirs[feature] = []
                    rprod[feature] = 1.0
                dirs[feature].append((node_ix, toward_left))
                rprod[feature] *= step_ratio
            self.leaves.append(
                _LeafPath(
                    value=node.value,
                    features=feats,
                    node_dirs=[dirs[f] for f in feats],
                    ratios=[rprod[f] for f in feats],
                    coef=[],
                )
            )
            self.expected += node.value * (node.n_samples / root_n)
            return
        node_ix = len(self.nodes)
        self.nodes.append(node)
        left_ratio = node.left.n_samples / node.n_samples
        right_ratio = node.right.n_samples / node.n_samples
        self._collect(node.left, path + [(node.feature, node_ix, True, left_ratio)], root_n)
        self._collect(node.right, path + [(node.feature, node_ix, False, right_ratio)], root_n)

    def _coefficients(self, leaf: _LeafPath) -> list[list[float]]:
        m = len(leaf.features)
        table = []
        for pattern in range(1 << m):
            a = [(pattern >> i) & 1 for i in range(m)]
            coefs = []
            for i in range(m):
                others = [j for j in range(m) if j != i]
                acc = 0.0
                for size in range(len(others) + 1):
                    weight = _shapley_weight(size, m)
                    for subset in combinations(others, size):
                        if any(a[j] == 0 for j in subset):
                            continue
                        prod = 1.0
                        for j in others:
                            if j not in subset:
                                prod *= leaf.ratios[j]
                        acc += weight * prod
                coefs.append((a[i] - leaf.ratios[i]) * acc)
            table.append(coefs)
        return table

    def decisions(self, row: np.ndarray) -> list[bool]:
        """Per internal node: does the row go left."""
        out = []
        for node in self.nodes:
            v = row[node.feature]
            out.append(node.default_left if np.isnan(v) else bool(v < node.threshold))
        return out

    def attribute(self, row: np.ndarray, phi: np.ndarray) -> None:
        go_left = self.decisions(row)
        for leaf in self.leaves:
            pattern = 0
            for i, node_dir in enumerate(leaf.node_dirs):
                if all(go_left[ix] == toward_left for ix, toward_left in node_dir):
                    pattern |= 1 << i
            coefs = leaf.coef[pattern]
            for i, feature in enumerate(leaf.features):
                phi[feature] += leaf.value * coefs[i]


class ShapExplainer:
    """Reusable attributor; precomputation is amortized across samples."""

    def __init__(self, model: GBTModel):
        self.model = model
        self._trees = [_TreeAttributor(t) for t in model.trees]
        self.base = model.base_value + model.learning_rate * sum(t.expected for t in self._trees)

    def shap_values(self, x: FeatureVector | dict) -> ShapVector:
        row = row_from_features(x, self.model.feature_names)
        phi = np.zeros(len(self.model.feature_names))
        for tree in self._trees:
            tree.attribute(row, phi)
        phi *= self.model.learning_rate
        return ShapVector(
            self.base,
            {name: float(v) for name, v in zip(self.model.feature_names, phi)},
        )


def tree_shap(model: GBTModel, x: FeatureVector | dict) -> ShapVector:
    """Exact Shapley values of one prediction; additive across trees."""
    return ShapExplainer(model).shap_values(x)


def _expvalue(node: TreeNode, row: np.ndarray, known: np.ndarray) -> float:
    if node.is_leaf:
        return node.value
    if known[node.feature]:
        v = row[node.feature]
        go_left = node.default_left if np.isnan(v) else v < node.threshold
        return _expvalue(node.left if go_left else node.right, row, known)
    w_left = node.left.n_samples / node.n_samples
    w_right = node.right.n_samples / node.n_samples
    return w_left * _expvalue(node.left, row, known) + w_right * _expvalue(node.right, row, known)


def brute_force_shapley(model: GBTModel, x: FeatureVector | dict) -> ShapVector:
    """Shapley values by full subset enumeration, same masking rule.

    Validation oracle only; refuses more than 15 features.
    """
    names = model.feature_names
    n = len(names)
    if n > BRUTE_FORCE_MAX_FEATURES:
        raise DataError(f"brute force limited to {BRUTE_FORCE_MAX_FEATURES} features, model has {n}")
    row = row_from_features(x, names)

    def game(known: np.ndarray) -> float:
        return model.base_value + model.learning_rate * sum(
            _expvalue(t, row, known) for t in model.trees
        )

    values = {}
    for mask in range(1 << n):
        known = np.array([(mask >> j) & 1 == 1 for j in range(n)])
        values[mask] = game(known)

    phi = np.zeros(n)
    for i in range(n):
        for mask in range(1 << n):
            if mask & (1 << i):
                continue
            size = bin(mask).count("1")
            phi[i] += _shapley_weight(size, n) * (values[mask | (1 << i)] - values[mask])
    return ShapVector(values[0], {name: float(v) for name, v in zip(names, phi)})


def shap_report(model: GBTModel, m: FeatureMatrix) -> ShapReport:
    """Mean-|SHAP| ranking and per-feature dependence pairs."""
    if not m.rows:
        raise DataError("cannot build a SHAP report from an empty matrix")
    explainer = ShapExplainer(model)
    sums = {name: 0.0 for name in model.feature_names}
    dependence: dict[str, list[tuple[float | None, float]]] = {
        name: [] for name in model.feature_names
    }
    for row in m.rows:
        sv = explainer.shap_values(row.features)
        for name in model.feature_names:
            phi = sv.contributions[name]
            sums[name] += abs(phi)
            dependence[name].append((row.features.get(name), phi))
    count = len(m.rows)
    ranking = sorted(
        ((name, total / count) for name, total in sums.items()),
        key=lambda item: (-item[1], item[0]),
    )
    return ShapReport(ranking, dependence)


def write_shap_csvs(report: ShapReport, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    ranking_path = out_dir / "shap_ranking.csv"
    with ranking_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "mean_abs_shap"])
        for name, value in report.ranking:
            writer.writerow([name, repr(value)])
    written.append(ranking_path)
    for name, pairs in report.dependence.items():
        path = out_dir / f"shap_dependence_{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["value", "shap"])
            for value, phi in pairs:
                writer.writerow(["" if value is None else repr(value), repr(phi)])
        written.append(path)
    return written
