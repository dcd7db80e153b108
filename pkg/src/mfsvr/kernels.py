"""Anisotropic Gaussian kernels and the two-fidelity block kernel.

The block kernel over stacked LF/HF inputs is::

    | sigma_L k_L(xL, xL)          rho^2 sigma_L k_L(xL, xH)                    |
    | rho^2 sigma_L k_L(xH, xL)    rho^2 sigma_L k_L(xH, xH) + sigma_d k_d(xH, xH) |

with ``k(x, y) = exp(-sum_k theta_k (x_k - y_k)^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DimensionError

__all__ = [
    "KernelParams",
    "CoSvrHyperparams",
    "MfsKernelMatrix",
    "gauss_kernel",
    "gauss_kernel_matrix",
    "assemble_mfs_kernel",
    "mfs_cross_vector",
    "mfs_cross_matrix",
]


def _as_theta(theta) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(theta, dtype=float))
    if arr.ndim != 1:
        raise DimensionError(f"theta must be a vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class KernelParams:
    """Scale ``sigma`` and per-dimension inverse length-scales ``theta``."""

    sigma: float
    theta: np.ndarray

    def __post_init__(self):
        theta = _as_theta(self.theta)
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ConfigurationError(f"sigma must be finite and >= 0, got {self.sigma}")
        if np.any(~np.isfinite(theta)) or np.any(theta < 0):
            raise ConfigurationError(f"theta components must be finite and >= 0, got {theta}")
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "theta", theta)

    @property
    def dim(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class CoSvrHyperparams:
    """Tunable parameters of the two-fidelity kernel plus the ridge weight ``gamma``."""

    rho: float
    sigma_L: float
    sigma_d: float
    theta_L: np.ndarray
    theta_d: np.ndarray
    gamma: float = 1e4

    def __post_init__(self):
        theta_L = _as_theta(self.theta_L)
        theta_d = _as_theta(self.theta_d)
        if theta_L.shape != theta_d.shape:
            raise DimensionError(
                f"theta_L and theta_d lengths differ: {theta_L.shape[0]} vs {theta_d.shape[0]}"
            )
        for name in ("sigma_L", "sigma_d"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ConfigurationError(f"{name} must be finite and >= 0, got {v}")
        if np.any(theta_L < 0) or np.any(theta_d < 0):
            raise ConfigurationError("theta components must be >= 0")
        if not np.isfinite(self.rho):
            raise ConfigurationError(f"rho must be finite, got {self.rho}")
        if not (self.gamma > 0 and np.isfinite(self.gamma)):
            raise ConfigurationError(f"gamma must be positive and finite, got {self.gamma}")
        object.__setattr__(self, "theta_L", theta_L)
        object.__setattr__(self, "theta_d", theta_d)
        for name in ("rho", "sigma_L", "sigma_d", "gamma"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def dim(self) -> int:
        return self.theta_L.shape[0]

    @property
    def lf_kernel(self) -> KernelParams:
        return KernelParams(self.sigma_L, self.theta_L)

    @property
    def diff_kernel(self) -> KernelParams:
        return KernelParams(self.sigma_d, self.theta_d)

    def to_vector(self) -> np.ndarray:
        """Search-space layout: ``[rho, sigma_L, sigma_d, theta_L..., theta_d...]``."""
        return np.concatenate([[self.rho, self.sigma_L, self.sigma_d], self.theta_L, self.theta_d])

    @classmethod
    def from_vector(cls, vec, gamma: float = 1e4) -> "CoSvrHyperparams":
        vec = np.asarray(vec, dtype=float)
        if vec.ndim != 1 or vec.shape[0] < 5 or (vec.shape[0] - 3) % 2:
            raise DimensionError(f"hyperparameter vector has invalid length {vec.shape}")
        s = (vec.shape[0] - 3) // 2
        return cls(vec[0], vec[1], vec[2], vec[3 : 3 + s], vec[3 + s :], gamma)

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "sigma_L": self.sigma_L,
            "sigma_d": self.sigma_d,
            "theta_L": self.theta_L.tolist(),
            "theta_d": self.theta_d.tolist(),
            "gamma": self.gamma,
        }


@dataclass(frozen=True)
class MfsKernelMatrix:
    values: np.ndarray
    p: int
    q: int = field(default=0)

    @property
    def ll(self) -> np.ndarray:
        return self.values[: self.p, : self.p]

    @property
    def lh(self) -> np.ndarray:
        return self.values[: self.p, self.p :]

    @property
    def hl(self) -> np.ndarray:
        return self.values[self.p :, : self.p]

    @property
    def hh(self) -> np.ndarray:
        return self.values[self.p :, self.p :]


def _points(x, dim: int | None = None, name: str = "points") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D array of points, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise DimensionError(f"{name} have dimension {arr.shape[1]}, expected {dim}")
    return arr


def _weighted_sqdist(a: np.ndarray, b: np.ndarray, theta: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return (diff * diff) @ theta


def _self_sqdist(a: np.ndarray, theta: np.ndarray) -> np.ndarray:
    # mirror the upper triangle so square blocks are exactly symmetric
    d = _weighted_sqdist(a, a, theta)
    upper = np.triu(d, 1)
    return upper + upper.T


def gauss_kernel(x_i, x_j, params: KernelParams) -> float:
    """``sigma * exp(-sum_k theta_k (x_i[k] - x_j[k])^2)`` for a single pair of points."""
    xi = np.atleast_1d(np.asarray(x_i, dtype=float))
    xj = np.atleast_1d(np.asarray(x_j, dtype=float))
    if xi.ndim != 1 or xi.shape != xj.shape or xi.shape[0] != params.dim:
        raise DimensionError(
            f"dimension mismatch: x_i {xi.shape}, x_j {xj.shape}, theta ({params.dim},)"
        )
    d = xi - xj
    return params.sigma * float(np.exp(-np.dot(params.theta, d * d)))


def gauss_kernel_matrix(a, b, params: KernelParams) -> np.ndarray:
    """Pairwise kernel values between the rows of ``a`` and ``b``."""
    a = _points(a, params.dim, "a")
    b = _points(b, params.dim, "b")
    return params.sigma * np.exp(-_weighted_sqdist(a, b, params.theta))


def assemble_mfs_kernel(x_L, x_H, hp: CoSvrHyperparams) -> MfsKernelMatrix:
    """Build the symmetric ``(p+q) x (p+q)`` block kernel over LF then HF points."""
    x_L = _points(x_L, hp.dim, "x_L")
    x_H = _points(x_H, hp.dim, "x_H")
    p, q = x_L.shape[0], x_H.shape[0]
    if p < 1 or q < 1:
        raise DimensionError(f"need at least one LF and one HF point, got p={p}, q={q}")
    r2 = hp.rho * hp.rho
    ll = hp.sigma_L * np.exp(-_self_sqdist(x_L, hp.theta_L))
    lh = r2 * hp.sigma_L * np.exp(-_weighted_sqdist(x_L, x_H, hp.theta_L))
    hh = r2 * hp.sigma_L * np.exp(-_self_sqdist(x_H, hp.theta_L)) + hp.sigma_d * np.exp(
        -_self_sqdist(x_H, hp.theta_d)
    )
    values = np.empty((p + q, p + q))
    values[:p, :p] = ll
    values[:p, p:] = lh
    values[p:, :p] = lh.T
    values[p:, p:] = hh
    return MfsKernelMatrix(values, p, q)


def mfs_cross_matrix(x_star, x_L, x_H, hp: CoSvrHyperparams) -> np.ndarray:
    """Rows of HF-query kernel values, one row per query point (``m x (p+q)``)."""
    x_star = _points(x_star, hp.dim, "x_star")
    x_L = _points(x_L, hp.dim, "x_L")
    x_H = _points(x_H, hp.dim, "x_H")
    r2 = hp.rho * hp.rho
    hl = r2 * hp.sigma_L * np.exp(-_weighted_sqdist(x_star, x_L, hp.theta_L))
    hh = r2 * hp.sigma_L * np.exp(-_weighted_sqdist(x_star, x_H, hp.theta_L)) + hp.sigma_d * np.exp(
        -_weighted_sqdist(x_star, x_H, hp.theta_d)
    )
    return np.hstack([hl, hh])


def mfs_cross_vector(x_star, x_L, x_H, hp: CoSvrHyperparams) -> np.ndarray:
    """Kernel vector between a single HF query point and all training points."""
    x_star = np.asarray(x_star, dtype=float)
    if x_star.ndim != 1:
        raise DimensionError(f"x_star must be a single point, got shape {x_star.shape}")
    return mfs_cross_matrix(x_star, x_L, x_H, hp)[0]
