"""Two-fidelity LS-SVR (Co_SVR).

LF and HF samples are stacked into one bordered system whose kernel is the
block matrix from :mod:`mfsvr.kernels`; predictions target the HF response.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import gwo
from ._linalg import BorderedSystem
from .doe import DomainBox
from .errors import ConfigurationError, DimensionError, IllConditionedError
from .kernels import CoSvrHyperparams, assemble_mfs_kernel, mfs_cross_matrix
from .lssvr import Normalizer, SampleSet, bounding_box

__all__ = [
    "CoSvrHyperparams",
    "MultiFidelityData",
    "CoSvrModel",
    "DEFAULT_GAMMA",
    "default_cosvr_bounds",
    "train_cosvr",
    "predict_cosvr",
    "cosvr_cost",
    "fit_cosvr",
]

DEFAULT_GAMMA = 1e4
OBJECTIVES = ("training", "loo")


@dataclass(frozen=True)
class MultiFidelityData:
    lf: SampleSet
    hf: SampleSet

    def __post_init__(self):
        if self.lf.dim != self.hf.dim:
            raise DimensionError(f"LF dimension {self.lf.dim} != HF dimension {self.hf.dim}")
        if self.lf.domain != self.hf.domain:
            raise ConfigurationError("LF and HF samples must share one domain box")
        if self.lf.n < 1:
            raise ConfigurationError("need at least one LF sample")
        if self.hf.n < 2:
            raise ConfigurationError(f"need at least two HF samples, got {self.hf.n}")

    @classmethod
    def from_arrays(cls, x_lf, y_lf, x_hf, y_hf, domain: Optional[DomainBox] = None) -> "MultiFidelityData":
        x_lf = np.asarray(x_lf, dtype=float)
        x_hf = np.asarray(x_hf, dtype=float)
        if x_lf.ndim == 1:
            x_lf = x_lf[:, None]
        if x_hf.ndim == 1:
            x_hf = x_hf[:, None]
        if x_lf.ndim != 2 or x_hf.ndim != 2 or x_lf.shape[1] != x_hf.shape[1]:
            raise DimensionError(f"LF points {x_lf.shape} and HF points {x_hf.shape} differ in dimension")
        if domain is None:
            domain = bounding_box(x_lf, x_hf)
        return cls(SampleSet(x_lf, y_lf, domain), SampleSet(x_hf, y_hf, domain))

    @property
    def dim(self) -> int:
        return self.hf.dim

    @property
    def p(self) -> int:
        return self.lf.n

    @property
    def q(self) -> int:
        return self.hf.n

    @property
    def domain(self) -> DomainBox:
        return self.hf.domain

    @property
    def stacked_responses(self) -> np.ndarray:
        return np.concatenate([self.lf.responses, self.hf.responses])


@dataclass(frozen=True)
class CoSvrModel:
    """Trained Co_SVR. ``alpha`` (LF entries first) and ``b`` are in working units."""

    alpha: np.ndarray
    b: float
    hp: CoSvrHyperparams
    training: MultiFidelityData
    normalizer: Normalizer
    meta: dict = dataclasses.field(default_factory=dict, compare=False)

    @property
    def working_lf(self) -> np.ndarray:
        return self.normalizer.x(self.training.lf.points)

    @property
    def working_hf(self) -> np.ndarray:
        return self.normalizer.x(self.training.hf.points)

    @property
    def working_responses(self) -> np.ndarray:
        return self.normalizer.y(self.training.stacked_responses)

    def kernel_matrix(self) -> np.ndarray:
        return assemble_mfs_kernel(self.working_lf, self.working_hf, self.hp).values

    def predict(self, x):
        return predict_cosvr(self, x)


def _normalizer(data: MultiFidelityData, normalize: bool) -> Normalizer:
    if normalize:
        return Normalizer.fit(data.domain, data.stacked_responses)
    return Normalizer.identity(data.dim)


def _system(zL, zH, hp: CoSvrHyperparams) -> BorderedSystem:
    K = assemble_mfs_kernel(zL, zH, hp).values
    return BorderedSystem(K, hp.gamma, describe=lambda: f"hyperparameters={hp.to_dict()}")


def train_cosvr(data: MultiFidelityData, hp: CoSvrHyperparams, normalize: bool = True) -> CoSvrModel:
    """Solve the bordered block-kernel system over stacked ``[y_L; y_H]``.

    Raises :class:`IllConditionedError` (carrying ``hp``) when the system cannot
    be trusted.
    """
    if hp.dim != data.dim:
        raise DimensionError(f"hyperparameter dimension {hp.dim} != data dimension {data.dim}")
    norm = _normalizer(data, normalize)
    try:
        system = _system(norm.x(data.lf.points), norm.x(data.hf.points), hp)
    except IllConditionedError as exc:
        exc.params = hp
        raise
    alpha, b = system.solve(norm.y(data.stacked_responses))
    return CoSvrModel(alpha, b, hp, data, norm)


def predict_cosvr(model: CoSvrModel, x):
    """HF prediction ``sum_i alpha_i k_i(x) + b`` in response units."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim <= 1
    pts = np.atleast_2d(pts) if pts.ndim else pts.reshape(1, 1)
    if pts.shape[1] != model.training.dim:
        raise DimensionError(f"query dimension {pts.shape[1]} != model dimension {model.training.dim}")
    k = mfs_cross_matrix(model.normalizer.x(pts), model.working_lf, model.working_hf, model.hp)
    out = model.normalizer.y_inverse(k @ model.alpha + model.b)
    return float(out[0]) if single else out


class _CostEvaluator:
    """Caches the normalized training arrays for repeated cost evaluations."""

    def __init__(self, data: MultiFidelityData, normalize: bool = True, objective: str = "training"):
        if objective not in OBJECTIVES:
            raise ConfigurationError(f"unknown objective {objective!r}; choose from {OBJECTIVES}")
        self.norm = _normalizer(data, normalize)
        self.zL = self.norm.x(data.lf.points)
        self.zH = self.norm.x(data.hf.points)
        self.t = self.norm.y(data.stacked_responses)
        self.p = data.p
        self.objective = objective
        z = np.vstack([self.zL, self.zH])
        # per-axis squared differences, reused by every evaluation
        self.sqdiff = (z[:, None, :] - z[None, :, :]) ** 2

    def kernel(self, hp: CoSvrHyperparams) -> np.ndarray:
        p = self.p
        K = hp.sigma_L * np.exp(-(self.sqdiff @ hp.theta_L))
        r2 = hp.rho * hp.rho
        K[:p, p:] *= r2
        K[p:, :p] *= r2
        K[p:, p:] = r2 * K[p:, p:] + hp.sigma_d * np.exp(-(self.sqdiff[p:, p:] @ hp.theta_d))
        return K

    def __call__(self, hp: CoSvrHyperparams) -> float:
        try:
            system = BorderedSystem(self.kernel(hp), hp.gamma)
            alpha, _ = system.solve(self.t)
            if self.objective == "training":
                # y_i - yhat_i = alpha_i / gamma on every training row
                resid = alpha[self.p :] / hp.gamma
            else:
                resid = alpha[self.p :] / system.inverse_diagonal()[self.p :]
        except (IllConditionedError, ConfigurationError):
            return gwo.PENALTY
        value = self.norm.y_std * float(np.sqrt(np.mean(resid * resid)))
        return value if np.isfinite(value) else gwo.PENALTY


def cosvr_cost(
    data: MultiFidelityData, hp: CoSvrHyperparams, normalize: bool = True, objective: str = "training"
) -> float:
    """RMSE over the HF training samples (response units); penalty on failure.

    ``objective="loo"`` swaps the training residuals for leave-one-out residuals
    of the HF rows.
    """
    if hp.dim != data.dim:
        return gwo.PENALTY
    return _CostEvaluator(data, normalize, objective)(hp)


def default_cosvr_bounds(dim: int):
    """Search box ``[rho, sigma_L, sigma_d, theta_L..., theta_d...]`` and its log mask."""
    bounds = [(0.0, 1.0), (1e-3, 1e3), (1e-3, 1e3)] + [(1e-3, 1e3)] * (2 * dim)
    mask = [False, True, True] + [True] * (2 * dim)
    return bounds, mask


def fit_cosvr(
    data: MultiFidelityData,
    bounds=None,
    gwo_cfg: Optional[gwo.GwoConfig] = None,
    gamma: float = DEFAULT_GAMMA,
    objective: str = "training",
    log_mask=None,
    normalize: bool = True,
    map_fn=None,
) -> CoSvrModel:
    """Tune the kernel parameters by grey-wolf search on :func:`cosvr_cost`.

    ``gamma`` stays fixed during the search. The returned model's ``meta`` holds
    the best score, the per-iteration history and an ``all_penalty`` flag.
    """
    s = data.dim
    cfg = gwo_cfg or gwo.GwoConfig()
    default_bounds, default_mask = default_cosvr_bounds(s)
    bounds = default_bounds if bounds is None else list(bounds)
    if log_mask is None:
        log_mask = cfg.log_scale_mask if cfg.log_scale_mask is not None else default_mask
    if len(bounds) != 3 + 2 * s:
        raise ConfigurationError(f"Co_SVR search box needs {3 + 2 * s} coordinates, got {len(bounds)}")
    cfg = dataclasses.replace(cfg, bounds=bounds, log_scale_mask=list(log_mask))
    cost = _CostEvaluator(data, normalize, objective)

    def f(v):
        try:
            hp = CoSvrHyperparams.from_vector(v, gamma)
        except ConfigurationError:
            return gwo.PENALTY
        return cost(hp)

    res = gwo.minimize(f, cfg, map_fn=map_fn)
    hp = CoSvrHyperparams.from_vector(res.best_position, gamma)
    meta = {
        "objective": objective,
        "best_score": res.best_score,
        "history": res.history,
        "evaluations": res.evaluations,
        "all_penalty": res.best_score >= gwo.PENALTY,
    }
    if meta["all_penalty"]:
        # best position still ill-conditioned; return the unsolved model with the flag set
        p, q = data.p, data.q
        return CoSvrModel(np.zeros(p + q), 0.0, hp, data, _normalizer(data, normalize), meta)
    model = train_cosvr(data, hp, normalize)
    return dataclasses.replace(model, meta=meta)
