"""Supervised regressors built from scratch: CART forests, boosted trees, MLPs."""

from .core import (
    KINDS,
    Dataset,
    RegressorSpec,
    TrainedRegressor,
    fit,
    load_model,
    mlp_gradient,
    predict,
    refit_all,
    save_model,
)
from .mlp import Adam, Momentum, Network
from .trees import fit_boosted

__all__ = [
    "KINDS", "Dataset", "RegressorSpec", "TrainedRegressor", "fit", "load_model",
    "mlp_gradient", "predict", "refit_all", "save_model", "Adam", "Momentum", "Network",
    "fit_boosted",
]
