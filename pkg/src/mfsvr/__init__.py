"""Two-fidelity least-squares SVR surrogates with grey-wolf hyperparameter search."""

__version__ = "0.1.0"

from .cosvr import (  # noqa: E402
    CoSvrHyperparams,
    CoSvrModel,
    MultiFidelityData,
    cosvr_cost,
    fit_cosvr,
    predict_cosvr,
    train_cosvr,
)
from .gwo import GwoConfig, GwoResult, minimize  # noqa: E402
from .lssvr import LssvrModel, SampleSet, fit_lssvr, predict_lssvr, train_lssvr  # noqa: E402

__all__ = [
    "CoSvrHyperparams",
    "CoSvrModel",
    "MultiFidelityData",
    "cosvr_cost",
    "fit_cosvr",
    "predict_cosvr",
    "train_cosvr",
    "GwoConfig",
    "GwoResult",
    "minimize",
    "LssvrModel",
    "SampleSet",
    "fit_lssvr",
    "predict_lssvr",
    "train_lssvr",
]
