"""k-nearest-neighbor regression with exact brute-force distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..metrics import Prediction, Regressor

METRICS = ("euclidean", "manhattan")


@dataclass(frozen=True)
class KnnConfig:
    k: int = 6
    metric: str = "euclidean"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")


class KnnRegressor(Regressor):
    """Predicts the unweighted mean target of the k nearest training rows.

    Distance ties break toward the lower training-row index (stable sort).
    """

    def __init__(self, config: KnnConfig | None = None):
        self.config = config or KnnConfig()
        self._X: np.ndarray | None = None
        self._y: np.ndarray | None = None

    def fit(self, matrix) -> "KnnRegressor":
        if self.config.k > matrix.n_rows:
            raise ConfigError(f"k={self.config.k} exceeds {matrix.n_rows} training rows")
        self._X = matrix.features
        self._y = matrix.targets
        return self

    def predict(self, features) -> Prediction:
        if self._X is None:
            raise ConfigError("predict before fit")
        queries = np.atleast_2d(np.asarray(features, dtype=np.float64))
        k = self.config.k
        out = np.empty(queries.shape[0])
        # chunked so the (q, n, d) difference tensor stays small
        chunk = max(1, int(4e6 // max(1, self._X.size)))
        for start in range(0, queries.shape[0], chunk):
            block = queries[start:start + chunk]
            diff = block[:, None, :] - self._X[None, :, :]
            if self.config.metric == "euclidean":
                dists = np.sqrt((diff ** 2).sum(axis=2))
            else:
                dists = np.abs(diff).sum(axis=2)
            nearest = np.argsort(dists, axis=1, kind="stable")[:, :k]
            out[start:start + block.shape[0]] = self._y[nearest].mean(axis=1)
        return Prediction(out)
