"""Grey Wolf Optimizer for box-constrained, derivative-free minimization.

Random draws follow a fixed order so a run is a pure function of its seed:

1. initial positions: one ``(population, dim)`` uniform block;
2. per iteration: ``r1`` then ``r2``, each a ``(population, 3, dim)`` block where
   axis 1 indexes the 1st/2nd/3rd leader.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError

__all__ = ["PENALTY", "GwoConfig", "GwoResult", "coefficient_schedule", "minimize"]

logger = logging.getLogger(__name__)

PENALTY = float(np.finfo(float).max)


@dataclass(frozen=True)
class GwoConfig:
    population: int = 30
    iterations: int = 200
    seed: int = 0
    bounds: Optional[Sequence] = None
    log_scale_mask: Optional[Sequence[bool]] = None

    def validate(self) -> None:
        if int(self.population) != self.population or self.population < 4:
            raise ConfigurationError(f"population must be an integer >= 4, got {self.population}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ConfigurationError(f"iterations must be a positive integer, got {self.iterations}")
        if self.bounds is None or len(self.bounds) == 0:
            raise ConfigurationError("bounds are required")
        b = np.asarray(self.bounds, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2:
            raise ConfigurationError(f"bounds must be (low, high) pairs, got shape {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ConfigurationError("bounds must be finite")
        if np.any(b[:, 0] > b[:, 1]):
            k = int(np.flatnonzero(b[:, 0] > b[:, 1])[0])
            raise ConfigurationError(f"inverted bounds on coordinate {k}: {tuple(b[k])}")
        mask = self.mask
        if mask.shape[0] != b.shape[0]:
            raise ConfigurationError("log_scale_mask length must match bounds")
        if np.any(b[mask, 0] <= 0):
            raise ConfigurationError("log-scaled coordinates need strictly positive bounds")

    @property
    def mask(self) -> np.ndarray:
        n = 0 if self.bounds is None else len(self.bounds)
        if self.log_scale_mask is None:
            return np.zeros(n, dtype=bool)
        return np.asarray(self.log_scale_mask, dtype=bool)


@dataclass
class GwoResult:
    best_position: np.ndarray
    best_score: float
    history: list = field(default_factory=list)
    evaluations: int = 0


def coefficient_schedule(t: int, total: int, rng: np.random.Generator, shape=1):
    """Return ``(A, C, a)`` for iteration ``t`` of ``total``.

    ``a`` falls linearly from 2 at ``t = 0`` towards 0; ``A = 2 a r1 - a`` and
    ``C = 2 r2`` with ``r1`` drawn before ``r2``.
    """
    a = 2.0 * (1.0 - t / total)
    r1 = rng.random(shape)
    r2 = rng.random(shape)
    return 2.0 * a * r1 - a, 2.0 * r2, a


class _Space:
    """Maps between the search space (log10 on masked axes) and native values."""

    def __init__(self, cfg: GwoConfig):
        b = np.asarray(cfg.bounds, dtype=float)
        self.native_lo = b[:, 0]
        self.native_hi = b[:, 1]
        self.mask = cfg.mask
        self.pinned = self.native_lo == self.native_hi
        self.lo = np.where(self.mask, np.log10(np.where(self.mask, self.native_lo, 1.0)), self.native_lo)
        self.hi = np.where(self.mask, np.log10(np.where(self.mask, self.native_hi, 1.0)), self.native_hi)

    def clamp(self, x: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(x, self.lo), self.hi)

    def native(self, x: np.ndarray) -> np.ndarray:
        out = np.where(self.mask, 10.0**x, x)
        out = np.minimum(np.maximum(out, self.native_lo), self.native_hi)
        return np.where(self.pinned, self.native_lo, out)


def _score(objective, pos) -> float:
    v = float(objective(pos))
    return v if np.isfinite(v) else PENALTY


def minimize(
    objective: Callable[[np.ndarray], float],
    cfg: GwoConfig,
    map_fn: Optional[Callable] = None,
) -> GwoResult:
    """Minimize ``objective`` over ``cfg.bounds``.

    Non-finite objective values are replaced by :data:`PENALTY`. ``map_fn``
    (e.g. ``executor.map``) may evaluate a population in parallel; results are
    consumed in wolf order so the outcome does not depend on it.
    """
    cfg.validate()
    space = _Space(cfg)
    pop, dim = int(cfg.population), space.lo.shape[0]
    rng = np.random.default_rng(cfg.seed)
    mapper = map_fn or map

    def evaluate(positions):
        natives = [space.native(row) for row in positions]
        return np.fromiter(mapper(lambda p: _score(objective, p), natives), float, count=len(natives))

    X = space.lo + rng.random((pop, dim)) * (space.hi - space.lo)
    scores = evaluate(X)
    evaluations = pop

    lead_pos = np.zeros((3, dim))
    lead_score = np.full(3, np.inf)

    def update_leaders(X, scores):
        allpos = np.vstack([lead_pos, X])
        allscore = np.concatenate([lead_score, scores])
        # stable: incumbents win ties
        order = np.argsort(allscore, kind="stable")[:3]
        return allpos[order].copy(), allscore[order].copy()

    lead_pos, lead_score = update_leaders(X, scores)
    history = []
    for t in range(cfg.iterations):
        A, C, _ = coefficient_schedule(t, cfg.iterations, rng, (pop, 3, dim))
        D = np.abs(C * lead_pos[None, :, :] - X[:, None, :])
        cand = lead_pos[None, :, :] - A * D
        X = space.clamp((cand[:, 0] + cand[:, 1] + cand[:, 2]) / 3.0)
        scores = evaluate(X)
        evaluations += pop
        lead_pos, lead_score = update_leaders(X, scores)
        history.append(float(lead_score[0]))

    if lead_score[0] >= PENALTY:
        logger.warning("every grey wolf evaluation returned the penalty value")
    return GwoResult(space.native(lead_pos[0]), float(lead_score[0]), history, evaluations)
