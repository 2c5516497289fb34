"""Fully connected feed-forward regressor trained full-batch.

Loss is half the mean squared error; gradients come from plain backprop and
feed either Adam or the limited-memory quasi-Newton solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, TrainingError
from ..metrics import Prediction, Regressor
from ..optim import Adam, minimize_lbfgs

ACTIVATIONS = ("tanh", "relu")
OPTIMIZERS = ("lbfgs", "adam")


@dataclass(frozen=True)
class MlpConfig:
    hidden_sizes: tuple[int, ...] = (16, 8, 4)
    activation: str = "tanh"
    optimizer: str = "lbfgs"
    learning_rate: float = 0.001
    max_iter: int = 5000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ConfigError("hidden_sizes must be nonempty positive counts")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")


def _glorot_uniform(rng, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class MlpRegressor(Regressor):
    def __init__(self, config: MlpConfig | None = None):
        self.config = config or MlpConfig()
        self.weights: list[np.ndarray] | None = None
        self.biases: list[np.ndarray] | None = None
        self.n_iter: int = 0

    # -- parameter plumbing ---------------------------------------------------

    def init_params(self, n_inputs: int) -> None:
        rng = np.random.default_rng(np.random.SeedSequence([self.config.seed]))
        sizes = [n_inputs, *self.config.hidden_sizes, 1]
        self.weights = [_glorot_uniform(rng, sizes[i], sizes[i + 1])
                        for i in range(len(sizes) - 1)]
        self.biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]

    def _params(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def flatten_params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self._params()])

    def set_flat_params(self, flat: np.ndarray) -> None:
        offset = 0
        for p in self._params():
            p[...] = flat[offset:offset + p.size].reshape(p.shape)
            offset += p.size

    # -- forward / backward ---------------------------------------------------

    def _activate(self, z: np.ndarray) -> np.ndarray:
        return np.tanh(z) if self.config.activation == "tanh" else np.maximum(z, 0.0)

    def _activate_grad(self, a: np.ndarray) -> np.ndarray:
        if self.config.activation == "tanh":
            return 1.0 - a ** 2
        return (a > 0.0).astype(np.float64)

    def forward(self, X: np.ndarray) -> np.ndarray:
        h = X
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            h = self._activate(h @ W + b)
        return (h @ self.weights[-1] + self.biases[-1]).ravel()

    def loss_and_grads(self, X: np.ndarray, y: np.ndarray):
        """Half-MSE loss and gradients for every weight and bias array."""
        activations = [X]
        h = X
        for W, b in zip(self.weights[:-1], self.biases[:-1]):
            h = self._activate(h @ W + b)
            activations.append(h)
        pred = (h @ self.weights[-1] + self.biases[-1]).ravel()
        m = y.size
        diff = pred - y
        loss = 0.5 * float(np.mean(diff ** 2))

        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.biases)
        delta = (diff / m)[:, None]
        grads_w[-1] = activations[-1].T @ delta
        grads_b[-1] = delta.sum(axis=0)
        upstream = delta @ self.weights[-1].T
        for layer in range(len(self.weights) - 2, -1, -1):
            upstream = upstream * self._activate_grad(activations[layer + 1])
            grads_w[layer] = activations[layer].T @ upstream
            grads_b[layer] = upstream.sum(axis=0)
            if layer > 0:
                upstream = upstream @ self.weights[layer].T
        return loss, grads_w + grads_b

    # -- training --------------------------------------------------------------

    def fit(self, matrix) -> "MlpRegressor":
        X, y = matrix.features, matrix.targets
        self.init_params(X.shape[1])
        if self.config.optimizer == "adam":
            self._fit_adam(X, y)
        else:
            self._fit_lbfgs(X, y)
        return self

    def _fit_adam(self, X, y):
        optimizer = Adam(lr=self.config.learning_rate)
        params = self._params()
        previous = np.inf
        stalled = 0
        for it in range(self.config.max_iter):
            loss, grads = self.loss_and_grads(X, y)
            if not np.isfinite(loss):
                raise TrainingError("training loss became non-finite", iteration=it)
            # full-batch Adam oscillates; stop only after 10 consecutive
            # iterations whose loss change is below the improvement threshold
            if abs(previous - loss) < 1e-8:
                stalled += 1
                if stalled >= 10:
                    self.n_iter = it
                    return
            else:
                stalled = 0
            previous = loss
            optimizer.step(params, grads)
        self.n_iter = self.config.max_iter

    def _fit_lbfgs(self, X, y):
        def objective(flat):
            self.set_flat_params(flat)
            loss, grads = self.loss_and_grads(X, y)
            return loss, np.concatenate([g.ravel() for g in grads])

        result = minimize_lbfgs(objective, self.flatten_params(),
                                memory=10, max_iter=self.config.max_iter,
                                grad_tol=1e-10, f_tol=1e-8)
        if not np.isfinite(result.fun):
            raise TrainingError("training loss became non-finite", iteration=result.n_iter)
        self.set_flat_params(result.x)
        self.n_iter = result.n_iter

    def predict(self, features) -> Prediction:
        if self.weights is None:
            raise ConfigError("predict before fit")
        queries = np.atleast_2d(np.asarray(features, dtype=np.float64))
        return Prediction(self.forward(queries))
