"""Seeded data partitioning: Monte Carlo subsampling plans and k-fold covers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True)
class Fractions:
    train: float
    test: float
    holdout: float = 0.0

    def __post_init__(self):
        for name in ("train", "test", "holdout"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} fraction must be >= 0")
        if self.train <= 0:
            raise ConfigError("train fraction must be > 0")
        if self.train + self.test + self.holdout > 1.0 + 1e-12:
            raise ConfigError("fractions must sum to at most 1")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.train, self.test, self.holdout)


@dataclass(frozen=True)
class SplitPlan:
    """Disjoint train/test/holdout index sets with their seed provenance."""

    train: np.ndarray
    test: np.ndarray
    holdout: np.ndarray
    fractions: Fractions
    seed: int
    iteration: int

    def __post_init__(self):
        for name in ("train", "test", "holdout"):
            array = np.asarray(getattr(self, name), dtype=np.intp)
            array.setflags(write=False)
            object.__setattr__(self, name, array)


def _count(fraction: float, n: int) -> int:
    # floor, with a tiny epsilon so exact products are not lost to rounding
    return int(np.floor(fraction * n + 1e-9))


def dual_mc_split(n: int, fractions: Fractions, seed: int, iteration: int) -> SplitPlan:
    """Shuffle 0..n-1 and cut train, then test, then holdout by floored counts.

    The permutation depends only on (seed, iteration), so any plan can be
    regenerated from its provenance; the remainder past the three cuts is
    left unused.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    if seed < 0 or iteration < 0:
        raise ConfigError("seed and iteration must be >= 0")
    rng = np.random.default_rng(np.random.SeedSequence([seed, iteration]))
    perm = rng.permutation(n)
    n_train = _count(fractions.train, n)
    n_test = _count(fractions.test, n)
    n_holdout = _count(fractions.holdout, n)
    if n_train < 1:
        raise ConfigError(f"train split is empty for n={n}, fraction={fractions.train}")
    train = perm[:n_train]
    test = perm[n_train:n_train + n_test]
    holdout = perm[n_train + n_test:n_train + n_test + n_holdout]
    return SplitPlan(train=train, test=test, holdout=holdout,
                     fractions=fractions, seed=seed, iteration=iteration)


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """k disjoint shuffled validation folds covering 0..n-1, sizes within 1."""
    if not 2 <= k <= n:
        raise ConfigError(f"k must satisfy 2 <= k <= n (got k={k}, n={n})")
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    perm = rng.permutation(n)
    base, remainder = divmod(n, k)
    folds = []
    start = 0
    for fold in range(k):
        size = base + (1 if fold < remainder else 0)
        folds.append(np.sort(perm[start:start + size]))
        start += size
    return folds
