"""Shared regressor contracts and the error metrics used throughout.

RMSE in mm is the single accuracy metric; the combined noise floor gives the
best RMSE any regressor can be expected to reach on this kind of data.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


def rmse(predicted, actual) -> float:
    """Root mean square difference between two aligned vectors (mm)."""
    predicted = np.asarray(predicted, dtype=np.float64).ravel()
    actual = np.asarray(actual, dtype=np.float64).ravel()
    if predicted.size == 0:
        raise ConfigError("rmse of empty vectors is undefined")
    if predicted.shape != actual.shape:
        raise ConfigError(f"length mismatch: {predicted.size} vs {actual.size}")
    return float(np.sqrt(np.mean((predicted - actual) ** 2)))


def combined_noise_floor(repeatability: float, measurement_uncertainty: float) -> float:
    """Root sum of squares of process repeatability and measurement uncertainty."""
    if repeatability < 0 or measurement_uncertainty < 0:
        raise ConfigError("noise components must be >= 0")
    return float(np.hypot(repeatability, measurement_uncertainty))


@dataclass(frozen=True)
class Prediction:
    """Point predictions in mm."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if not np.all(np.isfinite(values)):
            raise ConfigError("prediction contains non-finite values")

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class PredictiveDistribution:
    """Per-query Gaussian predictive mean and standard deviation (mm)."""

    means: np.ndarray
    stddevs: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64).ravel()
        stddevs = np.asarray(self.stddevs, dtype=np.float64).ravel()
        means.setflags(write=False)
        stddevs.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stddevs", stddevs)
        if means.shape != stddevs.shape:
            raise ConfigError("means and stddevs must have equal length")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(stddevs))):
            raise ConfigError("predictive distribution contains non-finite values")
        if np.any(stddevs < 0):
            raise ConfigError("predictive stddevs must be >= 0")

    def __len__(self) -> int:
        return self.means.size


class Regressor:
    """Minimal contract every model family implements.

    ``fit`` consumes an encoded, already-scaled design matrix; ``predict``
    takes a raw feature array and is deterministic given the fitted state.
    """

    def fit(self, matrix) -> "Regressor":
        raise NotImplementedError

    def predict(self, features) -> Prediction:
        raise NotImplementedError

    def diagnostics(self) -> dict:
        """Optional fitted-state summary carried into evaluation reports."""
        return {}


class ProbabilisticRegressor(Regressor):
    """Adds a per-query predictive distribution on top of point predictions."""

    def predict_dist(self, features) -> PredictiveDistribution:
        raise NotImplementedError


PARITY_HEADER = "measured_mm,predicted_mm,aleatoric_mm,epistemic_mm"


@dataclass(frozen=True)
class ParityTable:
    """Measured vs predicted rows, optionally with uncertainty columns (mm)."""

    measured: np.ndarray
    predicted: np.ndarray
    aleatoric: np.ndarray | None = None
    epistemic: np.ndarray | None = None

    def __post_init__(self):
        measured = np.asarray(self.measured, dtype=np.float64).ravel()
        predicted = np.asarray(self.predicted, dtype=np.float64).ravel()
        object.__setattr__(self, "measured", measured)
        object.__setattr__(self, "predicted", predicted)
        if measured.shape != predicted.shape:
            raise ConfigError("measured/predicted length mismatch")
        for name in ("aleatoric", "epistemic"):
            column = getattr(self, name)
            if column is not None:
                column = np.asarray(column, dtype=np.float64).ravel()
                object.__setattr__(self, name, column)
                if column.shape != measured.shape:
                    raise ConfigError(f"{name} column length mismatch")
                if not np.all(np.isfinite(column)):
                    raise ConfigError(f"{name} column contains non-finite values")
        if not (np.all(np.isfinite(measured)) and np.all(np.isfinite(predicted))):
            raise ConfigError("parity table contains non-finite values")

    def __len__(self) -> int:
        return self.measured.size

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(PARITY_HEADER + "\n")
        for i in range(len(self)):
            cells = [format(self.measured[i], ".10g"), format(self.predicted[i], ".10g")]
            for column in (self.aleatoric, self.epistemic):
                cells.append("" if column is None else format(column[i], ".10g"))
            out.write(",".join(cells) + "\n")
        return out.getvalue()


def parity_table(measured, predicted, aleatoric=None, epistemic=None) -> ParityTable:
    return ParityTable(measured=measured, predicted=predicted,
                       aleatoric=aleatoric, epistemic=epistemic)
