"""Analytic HF/LF benchmark pairs with a correlation knob ``m``.

Every evaluator accepts a single point (returns a float) or an ``(n, s)`` array
(returns a length-``n`` array). Points on a function's singular set raise
:class:`DomainEvaluationError` instead of producing inf/nan.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .doe import DomainBox
from .errors import ConfigurationError, DimensionError, DomainEvaluationError

__all__ = [
    "BenchmarkFamily",
    "currin_hf",
    "currin_lf",
    "park1_hf",
    "park1_lf",
    "park2_hf",
    "park2_lf",
    "FAMILIES",
    "get_family",
]


def _prep(x, dim: int):
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise DimensionError(f"expected {dim}-D point(s), got shape {np.shape(x)}")
    return arr, single


def _finish(values: np.ndarray, single: bool):
    return float(values[0]) if single else values


def _check(bad: np.ndarray, what: str, points: np.ndarray):
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DomainEvaluationError(
            f"{what} at {np.count_nonzero(bad)} point(s), first: {points[i].tolist()}"
        )


def _check_m(m):
    if not (0.0 <= m <= 1.0):
        raise ConfigurationError(f"correlation knob m must lie in [0, 1], got {m}")


# --- Currin -------------------------------------------------------------------

def _currin_raw(x1, x2):
    rational = (2000 * x1**3 + 1900 * x1**2 + 2092 * x1 + 60) / (100 * x1**3 + 500 * x1**2 + 4 * x1 + 20)
    # at x2 == 0 this yields the one-sided limit factor 1 (exp(-inf) == 0)
    with np.errstate(divide="ignore", over="ignore"):
        return (1 - np.exp(-1 / (2 * x2))) * rational


def _rational_bad(x1):
    return 100 * x1**3 + 500 * x1**2 + 4 * x1 + 20 == 0


def currin_hf(x):
    """Currin exponential function (2-D); undefined at ``x2 = 0``."""
    pts, single = _prep(x, 2)
    x1, x2 = pts[:, 0], pts[:, 1]
    _check((x2 == 0) | _rational_bad(x1), "Currin HF singular (x2 = 0)", pts)
    return _finish(_currin_raw(x1, x2), single)


def _currin_shifts(x1, x2):
    lo2 = np.maximum(0.0, x2 - 0.05)
    return [
        (x1 + 0.05, x2 + 0.05),
        (x1 + 0.05, lo2),
        (x1 - 0.05, x2 + 0.05),
        (x1 - 0.05, lo2),
    ]


def _currin_lf_bad(x1, x2):
    # clamped shifts sit at x2 = 0 on purpose and take the limit value;
    # only the unclamped ones can hit the singular line
    bad = np.zeros(x1.shape, dtype=bool)
    for k, (a, b) in enumerate(_currin_shifts(x1, x2)):
        bad |= _rational_bad(a)
        if k in (0, 2):
            bad |= b == 0
    return bad


def currin_lf(x, m: float):
    """Shifted-average Currin LF variant; ``m`` weights the leading shifted term.

    Shifts clamped by ``max(0, x2 - 0.05)`` are evaluated at the ``x2 -> 0+``
    limit of the HF function.
    """
    _check_m(m)
    pts, single = _prep(x, 2)
    x1, x2 = pts[:, 0], pts[:, 1]
    _check(_currin_lf_bad(x1, x2), "Currin LF shifted point hits x2 = 0", pts)
    vals = [_currin_raw(a, b) for a, b in _currin_shifts(x1, x2)]
    out = (1 - m * m - 2 * m) * vals[0] + 0.25 * (vals[1] + vals[2] + vals[3])
    return _finish(out, single)


def _currin_valid(pts, m=None):
    x1, x2 = pts[:, 0], pts[:, 1]
    if m is None:
        return ~((x2 == 0) | _rational_bad(x1))
    return ~_currin_lf_bad(x1, x2)


# --- Park 1 -------------------------------------------------------------------

def _park1_arg(pts):
    x1, x2, x3, x4 = pts.T
    with np.errstate(divide="ignore", invalid="ignore"):
        return 1 + (x2 + x3**2) * x4 / x1**2


def _park1_bad(pts):
    return (pts[:, 0] == 0) | ~(_park1_arg(pts) >= 0)


def park1_hf(x):
    """Park function 1 (4-D). Singular at ``x1 = 0`` and where the sqrt argument is negative."""
    pts, single = _prep(x, 4)
    _check(_park1_bad(pts), "Park 1 undefined (x1 = 0 or negative sqrt argument)", pts)
    x1, x2, x3, x4 = pts.T
    out = x1 / 2 * (np.sqrt(_park1_arg(pts)) - 1) + (x1 + 3 * x4) * np.exp(1 + np.sin(x3))
    return _finish(out, single)


def park1_lf(x, m: float):
    _check_m(m)
    pts, single = _prep(x, 4)
    fh = np.atleast_1d(park1_hf(pts))
    x1, x2, x3, _ = pts.T
    out = (1 - m * m - 2 * m) * (1 + np.sin(x1) / 10) * fh - 2 * x1 + x2**2 + x3**2 + 0.5
    return _finish(out, single)


def _park1_valid(pts, m=None):
    return ~_park1_bad(pts)


# --- Park 2 -------------------------------------------------------------------

def park2_hf(x):
    pts, single = _prep(x, 4)
    x1, x2, x3, x4 = pts.T
    return _finish(2 / 3 * np.exp(x1 + x2) - x4 * np.sin(x3) + x3, single)


def park2_lf(x, m: float):
    _check_m(m)
    pts, single = _prep(x, 4)
    fh = np.atleast_1d(park2_hf(pts))
    x1, x2 = pts[:, 0], pts[:, 1]
    out = 1.2 * fh - (0.5 * m * m + m + 0.5) * 2 / 3 * np.exp(x1 + x2)
    return _finish(out, single)


def _always_valid(pts, m=None):
    return np.ones(pts.shape[0], dtype=bool)


# --- registry -----------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkFamily:
    name: str
    dimension: int
    domain: DomainBox
    hf: Callable
    lf: Callable
    valid: Callable = field(repr=False, default=_always_valid)
    presets: dict = field(default_factory=dict, repr=False)

    def domain_for(self, preset: str | None = None) -> DomainBox:
        if preset is None or preset == "declared":
            return self.domain
        try:
            return self.presets[preset]
        except KeyError:
            raise ConfigurationError(
                f"family {self.name!r} has no domain preset {preset!r}; "
                f"available: {['declared', *self.presets]}"
            ) from None

    def valid_mask(self, points, fidelity: str = "hf") -> np.ndarray:
        """Boolean mask of points where the requested fidelity can be evaluated."""
        pts, _ = _prep(points, self.dimension)
        return self.valid(pts, None if fidelity == "hf" else True)


FAMILIES = {
    "currin": BenchmarkFamily(
        "currin",
        2,
        DomainBox.cube(0.0, 0.5, 2),
        currin_hf,
        currin_lf,
        _currin_valid,
        {"standard": DomainBox.cube(0.0, 1.0, 2)},
    ),
    "park1": BenchmarkFamily(
        "park1",
        4,
        DomainBox.cube(-1.0, 0.0, 4),
        park1_hf,
        park1_lf,
        _park1_valid,
        {"standard": DomainBox.cube(0.0, 1.0, 4)},
    ),
    "park2": BenchmarkFamily("park2", 4, DomainBox.cube(0.0, 1.0, 4), park2_hf, park2_lf),
}


def get_family(name: str) -> BenchmarkFamily:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ConfigurationError(f"unknown benchmark family {name!r}; known: {sorted(FAMILIES)}") from None
