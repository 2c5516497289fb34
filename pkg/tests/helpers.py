"""Shared test utilities: finite differences and tiny hand-built matrices."""

import numpy as np

from dimuq.data import DesignMatrix


def central_difference(fun, x0, h=1e-6):
    """Central finite-difference gradient of a scalar function."""
    x0 = np.asarray(x0, dtype=np.float64)
    grad = np.empty_like(x0)
    for i in range(x0.size):
        up = x0.copy()
        up[i] += h
        down = x0.copy()
        down[i] -= h
        grad[i] = (fun(up) - fun(down)) / (2.0 * h)
    return grad


def matrix_from_arrays(features, targets) -> DesignMatrix:
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    labels = tuple(f"x{i}" for i in range(features.shape[1]))
    return DesignMatrix(features=features, targets=targets, column_labels=labels)
