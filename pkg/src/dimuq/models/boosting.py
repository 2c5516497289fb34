"""Gradient-boosted regression trees with shrinkage and stage subsampling.

Each stage fits a squared-error tree to the current residuals (the negative
gradient of the squared loss), optionally on a fresh without-replacement row
subsample, and adds it scaled by the learning rate. Tree growth is bounded
either best-first by leaf count or level-wise by depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..metrics import Prediction, Regressor
from .tree import grow_tree, predict_tree


@dataclass(frozen=True)
class GbtConfig:
    learning_rate: float = 0.3
    n_estimators: int = 120
    max_leaf_nodes: int | None = 30
    max_depth: int | None = None
    subsample: float = 1.0
    loss: str = "squared_error"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.learning_rate <= 1.0:
            raise ConfigError("learning_rate must be in (0, 1]")
        if self.n_estimators < 0:
            raise ConfigError("n_estimators must be >= 0")
        if not 0.0 < self.subsample <= 1.0:
            raise ConfigError("subsample must be in (0, 1]")
        if self.loss != "squared_error":
            raise ConfigError("only squared_error loss is supported")
        if self.max_leaf_nodes is not None and self.max_depth is not None:
            raise ConfigError("set max_leaf_nodes or max_depth, not both")
        if self.max_leaf_nodes is not None and self.max_leaf_nodes < 2:
            raise ConfigError("max_leaf_nodes must be >= 2")


@dataclass
class _FittedGbt:
    base_value: float
    trees: list = field(default_factory=list)
    train_losses: list = field(default_factory=list)


class GradientBoostingRegressor(Regressor):
    def __init__(self, config: GbtConfig | None = None):
        self.config = config or GbtConfig()
        self._state: _FittedGbt | None = None

    def fit(self, matrix) -> "GradientBoostingRegressor":
        cfg = self.config
        X, y = matrix.features, matrix.targets
        n = matrix.n_rows
        state = _FittedGbt(base_value=float(y.mean()))
        current = np.full(n, state.base_value)
        for stage in range(cfg.n_estimators):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, stage]))
            if cfg.subsample < 1.0:
                size = max(1, int(cfg.subsample * n))
                rows = rng.choice(n, size=size, replace=False)
            else:
                rows = np.arange(n)
            residuals = y[rows] - current[rows]
            tree = grow_tree(X[rows], residuals, criterion="squared_error",
                             max_depth=cfg.max_depth, max_leaf_nodes=cfg.max_leaf_nodes,
                             min_samples_leaf=1)
            current += cfg.learning_rate * predict_tree(tree, X)
            state.trees.append(tree)
            state.train_losses.append(float(np.mean((y - current) ** 2)))
        self._state = state
        return self

    def predict(self, features) -> Prediction:
        if self._state is None:
            raise ConfigError("predict before fit")
        queries = np.atleast_2d(np.asarray(features, dtype=np.float64))
        out = np.full(queries.shape[0], self._state.base_value)
        for tree in self._state.trees:
            out += self.config.learning_rate * predict_tree(tree, queries)
        return Prediction(out)

    @property
    def train_losses(self) -> list:
        """Per-stage mean squared training error, recorded during fit."""
        if self._state is None:
            raise ConfigError("no training losses before fit")
        return list(self._state.train_losses)
