"""Probabilistic neural regressors with aleatoric/epistemic decomposition."""

from .layers import BatchNormLayer, DenseLayer, VariationalDenseLayer, softplus, softplus_inverse
from .losses import kl_diag_gaussians, nll_loss
from .models import (
    EnsembleConfig,
    EnsembleNetwork,
    GaussianHead,
    HeadConfig,
    HeadNetwork,
    elbo_loss,
    train_ensemble_model,
    train_head_model,
)
from .snapshot import load_snapshot, save_snapshot
from .uncertainty import (
    EnsembleOutput,
    UncertaintyDecomposition,
    decompose_uncertainty,
    ensemble_predict,
)

__all__ = [
    "BatchNormLayer", "DenseLayer", "VariationalDenseLayer",
    "softplus", "softplus_inverse",
    "nll_loss", "kl_diag_gaussians", "elbo_loss",
    "GaussianHead", "HeadConfig", "EnsembleConfig",
    "HeadNetwork", "EnsembleNetwork",
    "train_head_model", "train_ensemble_model",
    "EnsembleOutput", "UncertaintyDecomposition",
    "ensemble_predict", "decompose_uncertainty",
    "save_snapshot", "load_snapshot",
]
