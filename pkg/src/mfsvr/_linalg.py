"""Bordered (kernel + ridge, bias row) linear systems shared by both regressors."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import dgecon

from .errors import IllConditionedError

MAX_CONDITION = 1e12


def bordered_matrix(K: np.ndarray, gamma: float) -> np.ndarray:
    n = K.shape[0]
    A = np.empty((n + 1, n + 1))
    A[:n, :n] = K
    A[np.arange(n), np.arange(n)] += 1.0 / gamma
    A[:n, n] = 1.0
    A[n, :n] = 1.0
    A[n, n] = 0.0
    return A


class BorderedSystem:
    """LU-factored ``[[K + I/gamma, 1], [1^T, 0]]`` with a condition guard.

    Raises :class:`IllConditionedError` when the 1-norm reciprocal condition
    estimate falls below ``1 / MAX_CONDITION``.
    """

    def __init__(self, K: np.ndarray, gamma: float, describe=None):
        self.A = bordered_matrix(K, gamma)
        self.n = K.shape[0]
        if not np.all(np.isfinite(self.A)):
            raise IllConditionedError(_msg("non-finite kernel entries", None, describe), None)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", LinAlgWarning)
            warnings.simplefilter("ignore", RuntimeWarning)
            self.lu = lu_factor(self.A, check_finite=False)
        anorm = np.abs(self.A).sum(axis=0).max()
        rcond, info = dgecon(self.lu[0], anorm, norm="1")
        self.rcond = float(rcond)
        if info != 0 or not np.isfinite(rcond) or rcond < 1.0 / MAX_CONDITION:
            raise IllConditionedError(
                _msg("bordered system is singular or ill-conditioned", self.rcond, describe), self.rcond
            )

    def solve(self, y: np.ndarray):
        rhs = np.append(np.asarray(y, dtype=float), 0.0)
        sol = lu_solve(self.lu, rhs, check_finite=False)
        if not np.all(np.isfinite(sol)):
            raise IllConditionedError("bordered solve produced non-finite values", self.rcond)
        return sol[: self.n], float(sol[self.n])

    def inverse_diagonal(self) -> np.ndarray:
        """Diagonal of ``A^{-1}`` restricted to the kernel rows."""
        inv = lu_solve(self.lu, np.eye(self.n + 1), check_finite=False)
        return np.diag(inv)[: self.n]


def _msg(base, rcond, describe):
    text = base
    if rcond is not None:
        text += f" (condition estimate {1.0 / rcond if rcond > 0 else float('inf'):.3g})"
    if describe is not None:
        text += f"; {describe() if callable(describe) else describe}"
    return text
