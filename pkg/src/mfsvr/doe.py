"""Seeded Latin hypercube designs and unit-cube <-> domain scaling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DataError, DimensionError

__all__ = ["DomainBox", "lhs", "scale", "unscale", "make_mf_doe", "uniform", "sub_seeds"]

_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class DomainBox:
    """Axis-aligned box, one ``(low, high)`` interval per input dimension."""

    intervals: tuple

    def __post_init__(self):
        iv = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        if not iv:
            raise ConfigurationError("domain box needs at least one interval")
        for k, (lo, hi) in enumerate(iv):
            if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
                raise ConfigurationError(f"axis {k}: need finite low < high, got ({lo}, {hi})")
        object.__setattr__(self, "intervals", iv)

    @classmethod
    def cube(cls, low: float, high: float, dim: int) -> "DomainBox":
        return cls(((low, high),) * dim)

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def low(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.intervals])

    @property
    def high(self) -> np.ndarray:
        return np.array([hi for _, hi in self.intervals])

    @property
    def span(self) -> np.ndarray:
        return self.high - self.low

    def contains(self, points, tol: float = _UNIT_TOL) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all((pts >= self.low - tol) & (pts <= self.high + tol), axis=1)

    def to_list(self) -> list:
        return [list(iv) for iv in self.intervals]


def sub_seeds(seed, n: int) -> list:
    """Derive ``n`` independent child seeds from ``seed`` via ``SeedSequence.spawn``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return ss.spawn(n)


def lhs(n: int, s: int, seed) -> np.ndarray:
    """Latin hypercube design of ``n`` points in ``[0, 1]^s``.

    Column ``k`` is drawn as a random permutation of the ``n`` strata followed by
    uniform jitter inside each stratum, so every interval ``[j/n, (j+1)/n)`` holds
    exactly one sample per column.
    """
    if n < 1 or s < 1:
        raise ConfigurationError(f"lhs needs n >= 1 and s >= 1, got n={n}, s={s}")
    rng = np.random.default_rng(seed)
    out = np.empty((n, s))
    for k in range(s):
        strata = rng.permutation(n)
        jitter = rng.random(n)
        col = (strata + jitter) / n
        # (j + u)/n can round up onto the next stratum edge
        bad = np.floor(col * n) > strata
        while np.any(bad):
            col[bad] = np.nextafter(col[bad], 0.0)
            bad = np.floor(col * n) > strata
        out[:, k] = col
    return out


def uniform(n: int, s: int, seed) -> np.ndarray:
    """Plain i.i.d. uniform points in ``[0, 1]^s``."""
    return np.random.default_rng(seed).random((n, s))


def scale(points, box: DomainBox) -> np.ndarray:
    """Map unit-cube points affinely onto ``box``."""
    u = np.asarray(points, dtype=float)
    if u.ndim == 1:
        u = u[None, :]
    if u.shape[1] != box.dim:
        raise DimensionError(f"points have dimension {u.shape[1]}, box has {box.dim}")
    if np.any(u < -_UNIT_TOL) or np.any(u > 1 + _UNIT_TOL):
        raise DataError("points outside the unit cube cannot be scaled")
    return box.low + u * box.span


def unscale(points, box: DomainBox) -> np.ndarray:
    """Inverse of :func:`scale` (no range check; used for arbitrary query points)."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != box.dim:
        raise DimensionError(f"points have dimension {x.shape[1]}, box has {box.dim}")
    return (x - box.low) / box.span


def make_mf_doe(s: int, box: DomainBox, hf_n: int, lf_n: int, seed) -> tuple:
    """Independent (non-nested) HF and LF Latin hypercube designs scaled to ``box``."""
    if hf_n < 1 or lf_n < 1:
        raise ConfigurationError(f"sample counts must be positive, got hf={hf_n}, lf={lf_n}")
    if box.dim != s:
        raise DimensionError(f"box dimension {box.dim} does not match s={s}")
    hf_seed, lf_seed = sub_seeds(seed, 2)
    return scale(lhs(hf_n, s, hf_seed), box), scale(lhs(lf_n, s, lf_seed), box)
