"""Single-fidelity least-squares SVR.

Training solves one bordered system; hyperparameters for the baseline are
chosen by grey-wolf search on the closed-form leave-one-out RMSE.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import gwo
from ._linalg import BorderedSystem
from .doe import DomainBox
from .errors import ConfigurationError, DataError, DimensionError, IllConditionedError
from .kernels import KernelParams, gauss_kernel_matrix

__all__ = [
    "SampleSet",
    "Normalizer",
    "LssvrModel",
    "train_lssvr",
    "predict_lssvr",
    "lssvr_loo_rmse",
    "fit_lssvr",
    "default_lssvr_bounds",
]

logger = logging.getLogger(__name__)

_DOMAIN_TOL = 1e-12


@dataclass(frozen=True)
class SampleSet:
    """Input points (``n x s``) with aligned responses at one fidelity."""

    points: np.ndarray
    responses: np.ndarray
    domain: Optional[DomainBox] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        y = np.asarray(self.responses, dtype=float).ravel()
        if pts.ndim != 2:
            raise DimensionError(f"points must be 2-D, got shape {pts.shape}")
        if pts.shape[0] != y.shape[0]:
            raise DimensionError(f"{pts.shape[0]} points but {y.shape[0]} responses")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(y))):
            raise DataError("sample sets must contain finite values only")
        domain = self.domain
        if domain is None:
            domain = bounding_box(pts)
        if domain.dim != pts.shape[1]:
            raise DimensionError(f"domain has dimension {domain.dim}, points have {pts.shape[1]}")
        if not np.all(domain.contains(pts, _DOMAIN_TOL)):
            raise DataError("sample points lie outside the declared domain")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "responses", y)
        object.__setattr__(self, "domain", domain)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def subset(self, idx) -> "SampleSet":
        return SampleSet(self.points[idx], self.responses[idx], self.domain)


def bounding_box(*point_sets) -> DomainBox:
    """Tightest box around the given points; flat axes are widened to unit length."""
    pts = np.vstack([np.atleast_2d(p) for p in point_sets])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    flat = hi <= lo
    lo = np.where(flat, lo - 0.5, lo)
    hi = np.where(flat, hi + 0.5, hi)
    return DomainBox(tuple(zip(lo.tolist(), hi.tolist())))


@dataclass(frozen=True)
class Normalizer:
    """Affine input map onto the unit box and response standardization."""

    x_low: np.ndarray
    x_span: np.ndarray
    y_mean: float = 0.0
    y_std: float = 1.0

    @classmethod
    def identity(cls, dim: int) -> "Normalizer":
        return cls(np.zeros(dim), np.ones(dim), 0.0, 1.0)

    @classmethod
    def fit(cls, domain: DomainBox, responses) -> "Normalizer":
        y = np.asarray(responses, dtype=float)
        std = float(y.std()) if y.size > 1 else 0.0
        return cls(domain.low, domain.span, float(y.mean()), std if std > 0 else 1.0)

    def x(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.x_low) / self.x_span

    def y(self, responses) -> np.ndarray:
        return (np.asarray(responses, dtype=float) - self.y_mean) / self.y_std

    def y_inverse(self, values):
        return self.y_mean + self.y_std * values

    def to_dict(self) -> dict:
        return {
            "x_low": np.asarray(self.x_low).tolist(),
            "x_span": np.asarray(self.x_span).tolist(),
            "y_mean": self.y_mean,
            "y_std": self.y_std,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Normalizer":
        return cls(np.asarray(d["x_low"], float), np.asarray(d["x_span"], float), float(d["y_mean"]), float(d["y_std"]))


@dataclass(frozen=True)
class LssvrModel:
    """Trained LS-SVR. ``alpha`` and ``b`` live in the normalized working units."""

    alpha: np.ndarray
    b: float
    kernel: KernelParams
    gamma: float
    training: SampleSet
    normalizer: Normalizer
    meta: dict = dataclasses.field(default_factory=dict, compare=False)

    @property
    def working_points(self) -> np.ndarray:
        return self.normalizer.x(self.training.points)

    @property
    def working_responses(self) -> np.ndarray:
        return self.normalizer.y(self.training.responses)

    def predict(self, x):
        return predict_lssvr(self, x)


def _check_gamma(gamma):
    if not (np.isfinite(gamma) and gamma > 0):
        raise ConfigurationError(f"gamma must be positive and finite, got {gamma}")


def _system(z, kernel: KernelParams, gamma: float) -> BorderedSystem:
    K = gauss_kernel_matrix(z, z, kernel)
    # exact symmetry
    K = np.triu(K) + np.triu(K, 1).T
    return BorderedSystem(
        K, gamma, describe=lambda: f"gamma={gamma:.6g}, theta={np.array2string(kernel.theta, precision=6)}"
    )


def train_lssvr(data: SampleSet, kernel: KernelParams, gamma: float, normalize: bool = False) -> LssvrModel:
    """Fit dual weights and bias by solving the bordered LS-SVR system.

    With ``normalize=True`` inputs are mapped to the unit box of ``data.domain``
    and responses standardized before the solve.
    """
    _check_gamma(gamma)
    if data.n < 2:
        raise ConfigurationError(f"LS-SVR needs at least 2 samples, got {data.n}")
    if kernel.dim != data.dim:
        raise DimensionError(f"kernel dimension {kernel.dim} does not match data dimension {data.dim}")
    norm = Normalizer.fit(data.domain, data.responses) if normalize else Normalizer.identity(data.dim)
    system = _system(norm.x(data.points), kernel, gamma)
    alpha, b = system.solve(norm.y(data.responses))
    return LssvrModel(alpha, b, kernel, float(gamma), data, norm)


def predict_lssvr(model: LssvrModel, x):
    """``sum_i alpha_i K(x_i, x) + b`` mapped back to response units."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim <= 1
    pts = np.atleast_2d(pts) if pts.ndim else pts.reshape(1, 1)
    if pts.shape[1] != model.training.dim:
        raise DimensionError(f"query dimension {pts.shape[1]} != model dimension {model.training.dim}")
    k = gauss_kernel_matrix(model.normalizer.x(pts), model.working_points, model.kernel)
    out = model.normalizer.y_inverse(k @ model.alpha + model.b)
    return float(out[0]) if single else out


class _LooEvaluator:
    def __init__(self, data: SampleSet, normalize: bool = True):
        norm = Normalizer.fit(data.domain, data.responses) if normalize else Normalizer.identity(data.dim)
        z = norm.x(data.points)
        self.sqdiff = (z[:, None, :] - z[None, :, :]) ** 2
        self.t = norm.y(data.responses)

    def __call__(self, kernel: KernelParams, gamma: float) -> float:
        _check_gamma(gamma)
        K = kernel.sigma * np.exp(-(self.sqdiff @ kernel.theta))
        system = BorderedSystem(K, gamma)
        alpha, _ = system.solve(self.t)
        loo = alpha / system.inverse_diagonal()
        return float(np.sqrt(np.mean(loo * loo)))


def lssvr_loo_rmse(data: SampleSet, kernel: KernelParams, gamma: float, normalize: bool = True) -> float:
    """Closed-form leave-one-out RMSE (``alpha_i / [A^-1]_ii``), in working units."""
    if kernel.dim != data.dim:
        raise DimensionError(f"kernel dimension {kernel.dim} does not match data dimension {data.dim}")
    return _LooEvaluator(data, normalize)(kernel, gamma)


def default_lssvr_bounds(dim: int):
    """``theta`` in [1e-3, 1e3] per axis and ``gamma`` in [1e-2, 1e6], all log-scaled."""
    bounds = [(1e-3, 1e3)] * dim + [(1e-2, 1e6)]
    return bounds, [True] * (dim + 1)


def fit_lssvr(
    data: SampleSet, bounds=None, gwo_cfg: Optional[gwo.GwoConfig] = None, log_mask=None
) -> LssvrModel:
    """Grey-wolf search over ``[theta_1..theta_s, gamma]`` (``sigma`` fixed to 1) on LOO RMSE.

    ``log_mask`` defaults to the config's mask, else every coordinate log-scaled.
    """
    s = data.dim
    cfg = gwo_cfg or gwo.GwoConfig()
    default_bounds, default_mask = default_lssvr_bounds(s)
    bounds = default_bounds if bounds is None else list(bounds)
    if log_mask is None:
        log_mask = cfg.log_scale_mask if cfg.log_scale_mask is not None else default_mask
    if len(bounds) != s + 1:
        raise ConfigurationError(f"LS-SVR search box needs {s + 1} coordinates, got {len(bounds)}")
    cfg = dataclasses.replace(cfg, bounds=bounds, log_scale_mask=list(log_mask))

    loo = _LooEvaluator(data)

    def objective(v):
        try:
            return loo(KernelParams(1.0, v[:s]), v[s])
        except (IllConditionedError, ConfigurationError):
            return gwo.PENALTY

    res = gwo.minimize(objective, cfg)
    model = train_lssvr(data, KernelParams(1.0, res.best_position[:s]), res.best_position[s], normalize=True)
    meta = {
        "objective": res.best_score,
        "evaluations": res.evaluations,
        "all_penalty": res.best_score >= gwo.PENALTY,
    }
    return dataclasses.replace(model, meta=meta)
