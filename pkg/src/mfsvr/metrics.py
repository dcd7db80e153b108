"""Accuracy and correlation statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMetricError, DimensionError

__all__ = [
    "AccuracySummary",
    "r_squared",
    "pearson_r2",
    "welch_t",
    "summarize",
    "T_THRESHOLD",
    "T_DOF",
]

# one-sided 95% Student t for 30 + 30 repeats
T_THRESHOLD = 1.65
T_DOF = 58


def _pair(a, b):
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise DegenerateMetricError("need at least two values")
    return a, b


def r_squared(truth, pred) -> float:
    """Coefficient of determination ``1 - SS_res / SS_tot``."""
    y, yhat = _pair(truth, pred)
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        raise DegenerateMetricError("R^2 undefined for constant truth")
    return float(1.0 - np.sum((y - yhat) ** 2) / ss_tot)


def pearson_r2(y_h, y_l) -> float:
    """Squared sample Pearson correlation between HF and LF responses."""
    a, b = _pair(y_h, y_l)
    da = a - a.mean()
    db = b - b.mean()
    saa = np.dot(da, da)
    sbb = np.dot(db, db)
    if saa == 0 or sbb == 0:
        raise DegenerateMetricError("Pearson correlation undefined for a constant input")
    r = np.dot(da, db) / math.sqrt(saa * sbb)
    return float(min(1.0, r * r))


@dataclass(frozen=True)
class AccuracySummary:
    mean_r2: float
    std_r2: float
    n_repeats: int
    per_repeat: tuple = field(default=())


def summarize(per_repeat) -> AccuracySummary:
    """Mean and (n - 1)-divisor standard deviation; std is 0 for a single value."""
    vals = tuple(float(v) for v in per_repeat)
    if not vals:
        raise DegenerateMetricError("cannot summarize an empty list")
    arr = np.array(vals)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return AccuracySummary(float(arr.mean()), std, len(vals), vals)


def welch_t(a: AccuracySummary, b: AccuracySummary) -> float:
    """Unequal-variance two-sample t statistic of ``a.mean_r2 - b.mean_r2``."""
    if a.n_repeats < 2 or b.n_repeats < 2:
        raise DegenerateMetricError("t statistic needs at least two repeats per side")
    var = a.std_r2**2 / a.n_repeats + b.std_r2**2 / b.n_repeats
    if var <= 0:
        raise DegenerateMetricError("zero combined variance")
    return (a.mean_r2 - b.mean_r2) / math.sqrt(var)
