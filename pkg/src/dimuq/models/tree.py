"""Regression trees: greedy binary splits under squared or absolute error.

Split candidates are midpoints between consecutive distinct feature values.
Ties on split gain resolve to the lowest feature index, then the lowest
threshold, so refits are bit-reproducible. Growth is either depth-limited
(level order) or best-first up to a leaf budget; the latter is what the
boosting machine uses.

Absolute-error split search caps the number of candidate thresholds per
feature at 128 evenly spread positions once a node exceeds that many distinct
values; small nodes are searched exhaustively.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..metrics import Prediction, Regressor

_MAE_CANDIDATE_CAP = 128

CRITERIA = ("squared_error", "absolute_error")


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = 20
    min_samples_leaf: int = 5
    criterion: str = "squared_error"

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ConfigError("min_samples_leaf must be >= 1")
        if self.criterion not in CRITERIA:
            raise ConfigError(f"unknown criterion {self.criterion!r}")


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, value: float):
        self.feature = -1
        self.threshold = 0.0
        self.left: "_Node | None" = None
        self.right: "_Node | None" = None
        self.value = value

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _leaf_value(y: np.ndarray, criterion: str) -> float:
    return float(np.median(y)) if criterion == "absolute_error" else float(y.mean())


def _impurity(y: np.ndarray, criterion: str) -> float:
    if criterion == "absolute_error":
        return float(np.abs(y - np.median(y)).sum())
    return float(((y - y.mean()) ** 2).sum())


def _best_split_sse(X: np.ndarray, y: np.ndarray, feature_ids: np.ndarray,
                    min_leaf: int):
    """Vectorized exhaustive search minimizing summed squared error."""
    m = y.size
    cols = X[:, feature_ids]
    order = np.argsort(cols, axis=0, kind="stable")
    sorted_x = np.take_along_axis(cols, order, axis=0)
    sorted_y = y[order]
    csum = np.cumsum(sorted_y, axis=0)
    csum2 = np.cumsum(sorted_y ** 2, axis=0)
    total, total2 = csum[-1], csum2[-1]

    counts = np.arange(1, m, dtype=np.float64)[:, None]
    left_sse = csum2[:-1] - csum[:-1] ** 2 / counts
    right_counts = m - counts
    right_sum = total - csum[:-1]
    right_sse = (total2 - csum2[:-1]) - right_sum ** 2 / right_counts
    score = left_sse + right_sse

    valid = (counts >= min_leaf) & (right_counts >= min_leaf)
    valid = valid & (sorted_x[1:] > sorted_x[:-1])
    if not np.any(valid):
        return None
    score = np.where(valid, score, np.inf)
    flat = np.argmin(score.T)  # feature-major: lowest feature, then lowest threshold
    f_local, pos = divmod(flat, m - 1)
    if not np.isfinite(score[pos, f_local]):
        return None
    parent_sse = float(total2[f_local] - total[f_local] ** 2 / m)
    gain = parent_sse - float(score[pos, f_local])
    threshold = 0.5 * (sorted_x[pos, f_local] + sorted_x[pos + 1, f_local])
    return int(feature_ids[f_local]), float(threshold), gain


def _best_split_mae(X: np.ndarray, y: np.ndarray, feature_ids: np.ndarray,
                    min_leaf: int):
    """Search minimizing summed absolute deviation about child medians."""
    m = y.size
    parent = _impurity(y, "absolute_error")
    best = None
    for f in feature_ids:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sx, sy = col[order], y[order]
        positions = np.flatnonzero(sx[1:] > sx[:-1])
        positions = positions[(positions + 1 >= min_leaf) & (m - positions - 1 >= min_leaf)]
        if positions.size == 0:
            continue
        if positions.size > _MAE_CANDIDATE_CAP:
            picks = np.linspace(0, positions.size - 1, _MAE_CANDIDATE_CAP).round().astype(int)
            positions = positions[np.unique(picks)]
        for pos in positions:
            left, right = sy[:pos + 1], sy[pos + 1:]
            cost = float(np.abs(left - np.median(left)).sum()
                         + np.abs(right - np.median(right)).sum())
            gain = parent - cost
            if best is None or gain > best[2]:
                threshold = 0.5 * (sx[pos] + sx[pos + 1])
                best = (int(f), float(threshold), gain)
    return best


def _find_split(X, y, feature_ids, min_leaf, criterion):
    if criterion == "absolute_error":
        return _best_split_mae(X, y, feature_ids, min_leaf)
    return _best_split_sse(X, y, feature_ids, min_leaf)


def _candidate_features(n_features: int, max_features: int | None, rng) -> np.ndarray:
    if max_features is None or max_features >= n_features or rng is None:
        return np.arange(n_features)
    chosen = rng.choice(n_features, size=max_features, replace=False)
    return np.sort(chosen)


def grow_tree(X: np.ndarray, y: np.ndarray, *, criterion: str = "squared_error",
              max_depth: int | None = None, min_samples_leaf: int = 1,
              max_leaf_nodes: int | None = None, max_features: int | None = None,
              rng=None) -> _Node:
    """Grow one tree; ``max_leaf_nodes`` switches to best-first growth."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size == 0:
        raise ConfigError("cannot grow a tree on empty data")
    if max_leaf_nodes is not None:
        if max_depth is not None:
            raise ConfigError("set max_leaf_nodes or max_depth, not both")
        if max_leaf_nodes < 2:
            raise ConfigError("max_leaf_nodes must be >= 2")
        return _grow_best_first(X, y, criterion, min_samples_leaf, max_leaf_nodes,
                                max_features, rng)
    return _grow_depth_first(X, y, np.arange(y.size), 0, criterion, max_depth,
                             min_samples_leaf, max_features, rng)


def _grow_depth_first(X, y, idx, depth, criterion, max_depth, min_leaf,
                      max_features, rng) -> _Node:
    y_node = y[idx]
    node = _Node(_leaf_value(y_node, criterion))
    if (max_depth is not None and depth >= max_depth) or idx.size < 2 * min_leaf \
            or np.all(y_node == y_node[0]):
        return node
    features = _candidate_features(X.shape[1], max_features, rng)
    split = _find_split(X[idx], y_node, features, min_leaf, criterion)
    if split is None or split[2] <= 0.0:
        return node
    feature, threshold, _ = split
    mask = X[idx, feature] <= threshold
    node.feature = feature
    node.threshold = threshold
    node.left = _grow_depth_first(X, y, idx[mask], depth + 1, criterion, max_depth,
                                  min_leaf, max_features, rng)
    node.right = _grow_depth_first(X, y, idx[~mask], depth + 1, criterion, max_depth,
                                   min_leaf, max_features, rng)
    return node


def _grow_best_first(X, y, criterion, min_leaf, max_leaf_nodes, max_features, rng) -> _Node:
    counter = 0

    def evaluate(idx):
        y_node = y[idx]
        if idx.size < 2 * min_leaf or np.all(y_node == y_node[0]):
            return None
        features = _candidate_features(X.shape[1], max_features, rng)
        split = _find_split(X[idx], y_node, features, min_leaf, criterion)
        if split is None or split[2] <= 0.0:
            return None
        return split

    root_idx = np.arange(y.size)
    root = _Node(_leaf_value(y, criterion))
    heap: list[tuple] = []

    def push(node, idx):
        nonlocal counter
        split = evaluate(idx)
        if split is not None:
            heapq.heappush(heap, (-split[2], counter, node, idx, split))
            counter += 1

    push(root, root_idx)
    n_leaves = 1
    while heap and n_leaves < max_leaf_nodes:
        _, _, node, idx, (feature, threshold, _) = heapq.heappop(heap)
        mask = X[idx, feature] <= threshold
        left_idx, right_idx = idx[mask], idx[~mask]
        node.feature = feature
        node.threshold = threshold
        node.left = _Node(_leaf_value(y[left_idx], criterion))
        node.right = _Node(_leaf_value(y[right_idx], criterion))
        n_leaves += 1
        push(node.left, left_idx)
        push(node.right, right_idx)
    return root


def predict_tree(root: _Node, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    out = np.empty(X.shape[0])
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.value
        else:
            mask = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
    return out


class DecisionTreeRegressor(Regressor):
    """Single CART-style regression tree."""

    def __init__(self, config: TreeConfig | None = None):
        self.config = config or TreeConfig()
        self._root: _Node | None = None

    def fit(self, matrix) -> "DecisionTreeRegressor":
        cfg = self.config
        self._root = grow_tree(matrix.features, matrix.targets, criterion=cfg.criterion,
                               max_depth=cfg.max_depth,
                               min_samples_leaf=cfg.min_samples_leaf)
        return self

    def predict(self, features) -> Prediction:
        if self._root is None:
            raise ConfigError("predict before fit")
        return Prediction(predict_tree(self._root, features))
