"""Dense symmetric linear algebra shared by the primal and dual modules."""
from __future__ import annotations

import numpy as np
from scipy import linalg as sla

PD_TOL = 1e-9


class PreconditionError(ArithmeticError):
    """A matrix that must be positive definite is not.

    Attributes
    ----------
    matrix : str
        Human readable name of the offending matrix.
    lambda_min : float
        Its smallest eigenvalue.
    """

    def __init__(self, matrix: str, lambda_min: float, context: str = ""):
        self.matrix = matrix
        self.lambda_min = float(lambda_min)
        self.context = context
        msg = f"{matrix} is not positive definite (lambda_min = {lambda_min:.6g})"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


def extreme_eigs(S: np.ndarray) -> tuple[float, float]:
    w = np.linalg.eigvalsh(S)
    return float(w[0]), float(w[-1])


def spectral_scale(S: np.ndarray) -> float:
    """``1 + ||S||_2`` for symmetric ``S``."""
    lo, hi = extreme_eigs(S)
    return 1.0 + max(abs(lo), abs(hi))


def symmetrize_upper(S: np.ndarray) -> np.ndarray:
    # keep the upper triangle only, mirror it down
    return np.triu(S) + np.triu(S, 1).T


class SPDFactor:
    """Cholesky factor of a matrix checked to be positive definite."""

    def __init__(self, S: np.ndarray, name: str):
        lo, hi = extreme_eigs(S)
        scale = 1.0 + max(abs(lo), abs(hi))
        if not lo > PD_TOL * scale:
            raise PreconditionError(name, lo)
        self.lambda_min = lo
        self.lambda_max = hi
        self._cf = sla.cho_factor(S, lower=True, check_finite=False)

    def solve(self, b: np.ndarray) -> np.ndarray:
        return sla.cho_solve(self._cf, b, check_finite=False)


def batched_spd_solve(S: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``S[k] x[k] = b[k]`` for a stack of symmetric matrices.

    Entries whose matrix fails the positive-definiteness test are returned as
    NaN and flagged ``False`` in the mask.
    """
    w = np.linalg.eigvalsh(S)
    scale = 1.0 + np.abs(w).max(axis=-1)
    ok = w[:, 0] > PD_TOL * scale
    out = np.full(b.shape, np.nan)
    if ok.any():
        L = np.linalg.cholesky(S[ok])
        y = np.linalg.solve(L, b[ok][..., None])
        out[ok] = np.linalg.solve(np.swapaxes(L, -1, -2), y)[..., 0]
    return out, ok
