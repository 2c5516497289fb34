"""The two probabilistic network regressors.

Model kind one: a deterministic trunk (dense -> batch norm -> ReLU, three
hidden layers) feeding a two-parameter Gaussian output head. It learns the
data noise (aleatoric spread) but has a single fixed set of weights.

Model kind two: a single variational dense layer (sigmoid) over batch-
normalized inputs, feeding the same Gaussian head through a deterministic
output layer. Sampling its weight posterior turns it into an ensemble whose
spread of means is the model (epistemic) uncertainty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, TrainingError
from ..metrics import Prediction, PredictiveDistribution
from ..optim import Adam, RmsProp
from .layers import (
    STDDEV_FLOOR,
    BatchNormLayer,
    DenseLayer,
    VariationalDenseLayer,
    sigmoid,
    softplus,
)
from .losses import nll_grads, nll_loss


@dataclass(frozen=True)
class GaussianHead:
    """Raw two-column network output interpreted as a Gaussian per query."""

    raw_mean: np.ndarray
    raw_scale: np.ndarray

    @property
    def means(self) -> np.ndarray:
        return self.raw_mean

    @property
    def stddevs(self) -> np.ndarray:
        return softplus(self.raw_scale) + STDDEV_FLOOR


@dataclass(frozen=True)
class HeadConfig:
    hidden_sizes: tuple[int, ...] = (24, 16, 8)
    learning_rate: float = 0.001
    kl_weight: float | None = None  # None -> 1 / n_train
    output_prior_regularizer: bool = True

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ConfigError("hidden_sizes must be nonempty positive counts")


@dataclass(frozen=True)
class EnsembleConfig:
    n_units: int = 8
    learning_rate: float = 0.001
    kl_weight: float | None = None  # None -> 1 / n_train

    def __post_init__(self):
        if self.n_units < 1:
            raise ConfigError("n_units must be >= 1")


class HeadNetwork:
    """Deterministic trunk with a trainable-mean/-variance Gaussian output."""

    def __init__(self, n_inputs: int, hidden_sizes=(24, 16, 8), seed: int = 0):
        rng = np.random.default_rng(np.random.SeedSequence([seed]))
        self.n_inputs = n_inputs
        self.hidden_sizes = tuple(hidden_sizes)
        self.hidden: list[tuple[DenseLayer, BatchNormLayer]] = []
        previous = n_inputs
        for width in self.hidden_sizes:
            self.hidden.append((DenseLayer(previous, width, rng), BatchNormLayer(width)))
            previous = width
        self.output = DenseLayer(previous, 2, rng)
        self._relu_cache: list[np.ndarray] = []
        self.loss_trace: list[tuple[int, float, float, float]] = []

    def params(self):
        out = []
        for dense, bn in self.hidden:
            out += dense.params() + bn.params()
        return out + self.output.params()

    def grads(self):
        out = []
        for dense, bn in self.hidden:
            out += dense.grads() + bn.grads()
        return out + self.output.grads()

    def flat_params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params()])

    def set_flat_params(self, flat: np.ndarray) -> None:
        offset = 0
        for p in self.params():
            p[...] = flat[offset:offset + p.size].reshape(p.shape)
            offset += p.size

    def forward(self, X: np.ndarray, training: bool, update_running: bool = True) -> GaussianHead:
        self._relu_cache = []
        h = np.atleast_2d(np.asarray(X, dtype=np.float64))
        for dense, bn in self.hidden:
            h = np.maximum(bn.forward(dense.forward(h), training, update_running), 0.0)
            self._relu_cache.append(h)
        raw = self.output.forward(h)
        return GaussianHead(raw_mean=raw[:, 0], raw_scale=raw[:, 1])

    def loss_and_grads(self, X, y, kl_weight: float, training: bool = True,
                       update_running: bool = True):
        """Mean NLL plus the output-prior proximity penalty; fills the grads."""
        y = np.asarray(y, dtype=np.float64).ravel()
        head = self.forward(X, training, update_running)
        mu, sigma = head.means, head.stddevs
        m = y.size
        nll = nll_loss(mu, sigma, y)
        d_mu, d_sigma = nll_grads(mu, sigma, y)
        reg = 0.0
        if kl_weight > 0.0:
            per_sample = -np.log(sigma) + 0.5 * (sigma ** 2 + mu ** 2) - 0.5
            reg = kl_weight * float(per_sample.mean())
            d_mu = d_mu + kl_weight * mu / m
            d_sigma = d_sigma + kl_weight * (sigma - 1.0 / sigma) / m
        dz = np.column_stack([d_mu, d_sigma * sigmoid(head.raw_scale)])
        upstream = self.output.backward(dz)
        for (dense, bn), post in zip(reversed(self.hidden), reversed(self._relu_cache)):
            upstream = upstream * (post > 0.0)
            upstream = bn.backward(upstream)
            upstream = dense.backward(upstream)
        return nll, reg

    def infer(self, X: np.ndarray) -> GaussianHead:
        """Inference pass that touches no shared caches (thread-safe)."""
        h = np.atleast_2d(np.asarray(X, dtype=np.float64))
        for dense, bn in self.hidden:
            h = np.maximum(bn.apply(dense.apply(h)), 0.0)
        raw = self.output.apply(h)
        return GaussianHead(raw_mean=raw[:, 0], raw_scale=raw[:, 1])

    def predict_dist(self, features) -> PredictiveDistribution:
        head = self.infer(features)
        return PredictiveDistribution(means=head.means, stddevs=head.stddevs)

    def predict(self, features) -> Prediction:
        return Prediction(self.infer(features).means)


class EnsembleNetwork:
    """Variational-weight network sampled as an ensemble at prediction time."""

    def __init__(self, n_inputs: int, n_units: int = 8, seed: int = 0):
        rng = np.random.default_rng(np.random.SeedSequence([seed]))
        self.n_inputs = n_inputs
        self.n_units = n_units
        self.input_norm = BatchNormLayer(n_inputs)
        self.variational = VariationalDenseLayer(n_inputs, n_units, rng)
        self.output = DenseLayer(n_units, 2, rng)
        self._sigmoid_cache: np.ndarray | None = None
        self.loss_trace: list[tuple[int, float, float, float]] = []

    def params(self):
        return self.input_norm.params() + self.variational.params() + self.output.params()

    def grads(self):
        return self.input_norm.grads() + self.variational.grads() + self.output.grads()

    def flat_params(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params()])

    def set_flat_params(self, flat: np.ndarray) -> None:
        offset = 0
        for p in self.params():
            p[...] = flat[offset:offset + p.size].reshape(p.shape)
            offset += p.size

    def draw_noise(self, rng):
        return self.variational.draw_noise(rng)

    def forward(self, X: np.ndarray, noise, training: bool,
                update_running: bool = True) -> GaussianHead:
        h = np.atleast_2d(np.asarray(X, dtype=np.float64))
        h = self.input_norm.forward(h, training, update_running)
        h = sigmoid(self.variational.forward(h, noise))
        self._sigmoid_cache = h
        raw = self.output.forward(h)
        return GaussianHead(raw_mean=raw[:, 0], raw_scale=raw[:, 1])

    def infer(self, X: np.ndarray, noise) -> GaussianHead:
        """Sampled inference pass that touches no shared caches (thread-safe)."""
        h = np.atleast_2d(np.asarray(X, dtype=np.float64))
        h = sigmoid(self.variational.apply(self.input_norm.apply(h), noise))
        raw = self.output.apply(h)
        return GaussianHead(raw_mean=raw[:, 0], raw_scale=raw[:, 1])

    def backward_from_head(self, d_mu, d_sigma, raw_scale):
        dz = np.column_stack([d_mu, d_sigma * sigmoid(raw_scale)])
        upstream = self.output.backward(dz)
        upstream = upstream * self._sigmoid_cache * (1.0 - self._sigmoid_cache)
        upstream = self.variational.backward(upstream)
        self.input_norm.backward(upstream)


def elbo_loss(model: EnsembleNetwork, X, y, kl_weight: float, noise=None, rng=None,
              training: bool = True, update_running: bool = False,
              with_grads: bool = False):
    """Single-draw variational objective: mean NLL + kl_weight * analytic KL.

    Returns (total, nll, kl). The expectation over weights uses one
    reparameterized draw, supplied either as frozen ``noise`` or via ``rng``.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    if noise is None:
        if rng is None:
            raise ConfigError("elbo_loss needs either frozen noise or an rng")
        noise = model.draw_noise(rng)
    head = model.forward(X, noise, training, update_running)
    mu, sigma = head.means, head.stddevs
    nll = nll_loss(mu, sigma, y)
    kl = model.variational.kl_to_standard_normal()
    total = nll + kl_weight * kl
    if with_grads:
        d_mu, d_sigma = nll_grads(mu, sigma, y)
        model.backward_from_head(d_mu, d_sigma, head.raw_scale)
        model.variational.add_kl_grads(kl_weight)
    return total, nll, kl


def train_head_model(matrix, config: HeadConfig | None = None, epochs: int = 4000,
                     seed: int = 0) -> HeadNetwork:
    """Full-batch Adam on the Gaussian-head network; deterministic given seed."""
    config = config or HeadConfig()
    if matrix.n_rows == 0:
        raise ConfigError("cannot train on empty data")
    X, y = matrix.features, matrix.targets
    kl_weight = config.kl_weight if config.kl_weight is not None else 1.0 / matrix.n_rows
    if not config.output_prior_regularizer:
        kl_weight = 0.0
    model = HeadNetwork(matrix.width, config.hidden_sizes, seed=seed)
    optimizer = Adam(lr=config.learning_rate)
    for epoch in range(epochs):
        nll, reg = model.loss_and_grads(X, y, kl_weight, training=True)
        total = nll + reg
        if not np.isfinite(total):
            raise TrainingError("training loss became non-finite", iteration=epoch)
        model.loss_trace.append((epoch, nll, reg, total))
        optimizer.step(model.params(), model.grads())
    return model


def train_ensemble_model(matrix, config: EnsembleConfig | None = None,
                         epochs: int = 3000, seed: int = 0) -> EnsembleNetwork:
    """RMSprop on the single-draw variational objective; deterministic given seed."""
    config = config or EnsembleConfig()
    if matrix.n_rows == 0:
        raise ConfigError("cannot train on empty data")
    X, y = matrix.features, matrix.targets
    kl_weight = config.kl_weight if config.kl_weight is not None else 1.0 / matrix.n_rows
    model = EnsembleNetwork(matrix.width, config.n_units, seed=seed)
    train_rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    optimizer = RmsProp(lr=config.learning_rate)
    for epoch in range(epochs):
        total, nll, kl = elbo_loss(model, X, y, kl_weight, rng=train_rng,
                                   training=True, update_running=True, with_grads=True)
        if not np.isfinite(total):
            raise TrainingError("training loss became non-finite", iteration=epoch)
        model.loss_trace.append((epoch, nll, kl, total))
        optimizer.step(model.params(), model.grads())
    return model
