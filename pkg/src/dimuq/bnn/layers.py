"""Network building blocks with explicit forward/backward passes.

Everything is plain numpy; each layer caches what its backward pass needs
and accumulates parameter gradients aligned with ``params()``.
"""

from __future__ import annotations

import numpy as np


def softplus(x):
    return np.logaddexp(0.0, x)


def softplus_inverse(y):
    # exact inverse of log(1 + e^x) for y > 0
    return np.log(np.expm1(y))


def sigmoid(x):
    out = np.empty_like(np.asarray(x, dtype=np.float64))
    positive = x >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-x[positive]))
    exp_x = np.exp(x[~positive])
    out[~positive] = exp_x / (1.0 + exp_x)
    return out


STDDEV_FLOOR = 1e-6


class DenseLayer:
    """Affine map with Glorot-uniform weights."""

    def __init__(self, n_in: int, n_out: int, rng):
        limit = np.sqrt(6.0 / (n_in + n_out))
        self.W = rng.uniform(-limit, limit, size=(n_in, n_out))
        self.b = np.zeros(n_out)
        self.dW = np.zeros_like(self.W)
        self.db = np.zeros_like(self.b)
        self._x: np.ndarray | None = None

    def params(self):
        return [self.W, self.b]

    def grads(self):
        return [self.dW, self.db]

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.W + self.b

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Cache-free forward pass, safe under concurrent calls."""
        return x @ self.W + self.b

    def backward(self, dz: np.ndarray) -> np.ndarray:
        self.dW[...] = self._x.T @ dz
        self.db[...] = dz.sum(axis=0)
        return dz @ self.W.T


class BatchNormLayer:
    """Batch normalization with trainable scale/shift and running statistics.

    Training mode normalizes by batch statistics and (optionally) updates the
    running estimates; inference mode uses the running estimates only.
    """

    def __init__(self, n_units: int, momentum: float = 0.99, eps: float = 1e-3):
        self.gamma = np.ones(n_units)
        self.beta = np.zeros(n_units)
        self.running_mean = np.zeros(n_units)
        self.running_var = np.ones(n_units)
        self.momentum = momentum
        self.eps = eps
        self.dgamma = np.zeros_like(self.gamma)
        self.dbeta = np.zeros_like(self.beta)
        self._xhat: np.ndarray | None = None
        self._inv_std: np.ndarray | None = None

    def params(self):
        return [self.gamma, self.beta]

    def grads(self):
        return [self.dgamma, self.dbeta]

    def forward(self, x: np.ndarray, training: bool, update_running: bool = True) -> np.ndarray:
        if training:
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            if update_running:
                self.running_mean = self.momentum * self.running_mean + (1 - self.momentum) * mean
                self.running_var = self.momentum * self.running_var + (1 - self.momentum) * var
        else:
            mean, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        self._xhat, self._inv_std = xhat, inv_std
        self._training = training
        return self.gamma * xhat + self.beta

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Cache-free inference pass using the running statistics."""
        inv_std = 1.0 / np.sqrt(self.running_var + self.eps)
        return self.gamma * (x - self.running_mean) * inv_std + self.beta

    def backward(self, dy: np.ndarray) -> np.ndarray:
        xhat, inv_std = self._xhat, self._inv_std
        self.dgamma[...] = (dy * xhat).sum(axis=0)
        self.dbeta[...] = dy.sum(axis=0)
        dxhat = dy * self.gamma
        if not self._training:
            return dxhat * inv_std
        return inv_std * (dxhat - dxhat.mean(axis=0) - xhat * (dxhat * xhat).mean(axis=0))


class VariationalDenseLayer:
    """Dense layer whose weights carry independent Gaussian posteriors.

    Each weight and bias has a mean and a pre-softplus scale; a forward pass
    consumes one standard-normal noise draw per parameter (the
    reparameterization w = mu + softplus(rho) * eps), so gradients flow into
    both mean and scale. The prior is a standard normal per parameter.
    """

    def __init__(self, n_in: int, n_out: int, rng, init_mu_std: float = 0.1,
                 init_sigma: float = 0.05):
        self.mu_W = init_mu_std * rng.standard_normal((n_in, n_out))
        self.rho_W = np.full((n_in, n_out), softplus_inverse(init_sigma))
        self.mu_b = init_mu_std * rng.standard_normal(n_out)
        self.rho_b = np.full(n_out, softplus_inverse(init_sigma))
        self.dmu_W = np.zeros_like(self.mu_W)
        self.drho_W = np.zeros_like(self.rho_W)
        self.dmu_b = np.zeros_like(self.mu_b)
        self.drho_b = np.zeros_like(self.rho_b)
        self._cache = None

    def params(self):
        return [self.mu_W, self.rho_W, self.mu_b, self.rho_b]

    def grads(self):
        return [self.dmu_W, self.drho_W, self.dmu_b, self.drho_b]

    @property
    def n_parameters(self) -> int:
        return sum(p.size for p in self.params())

    def draw_noise(self, rng):
        return rng.standard_normal(self.mu_W.shape), rng.standard_normal(self.mu_b.shape)

    def sampled_weights(self, noise):
        eps_W, eps_b = noise
        sigma_W = softplus(self.rho_W)
        sigma_b = softplus(self.rho_b)
        return self.mu_W + sigma_W * eps_W, self.mu_b + sigma_b * eps_b

    def forward(self, x: np.ndarray, noise) -> np.ndarray:
        W, b = self.sampled_weights(noise)
        self._cache = (x, noise, W)
        return x @ W + b

    def apply(self, x: np.ndarray, noise) -> np.ndarray:
        """Cache-free sampled forward pass, safe under concurrent calls."""
        W, b = self.sampled_weights(noise)
        return x @ W + b

    def backward(self, dz: np.ndarray) -> np.ndarray:
        x, (eps_W, eps_b), W = self._cache
        dW = x.T @ dz
        db = dz.sum(axis=0)
        self.dmu_W[...] = dW
        self.drho_W[...] = dW * eps_W * sigmoid(self.rho_W)
        self.dmu_b[...] = db
        self.drho_b[...] = db * eps_b * sigmoid(self.rho_b)
        return dz @ W.T

    def kl_to_standard_normal(self) -> float:
        """Analytic KL(posterior || standard normal), summed over parameters."""
        total = 0.0
        for mu, rho in ((self.mu_W, self.rho_W), (self.mu_b, self.rho_b)):
            sigma = softplus(rho)
            total += float(np.sum(-np.log(sigma) + 0.5 * (sigma ** 2 + mu ** 2) - 0.5))
        return total

    def add_kl_grads(self, weight: float) -> None:
        """Accumulate d(weight * KL)/d(mu, rho) on top of the data gradients."""
        for mu, rho, dmu, drho in ((self.mu_W, self.rho_W, self.dmu_W, self.drho_W),
                                   (self.mu_b, self.rho_b, self.dmu_b, self.drho_b)):
            sigma = softplus(rho)
            dmu += weight * mu
            drho += weight * (sigma - 1.0 / sigma) * sigmoid(rho)
