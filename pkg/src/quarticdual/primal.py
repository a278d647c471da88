"""The primal functional J, its derivatives, a Newton root finder for dJ = 0,
and sign classification of the second variation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla
from scipy import optimize

from ._linalg import PD_TOL, symmetrize_upper
from .instance import ProblemInstance

POSITIVE_DEFINITE = "positive_definite"
NEGATIVE_DEFINITE = "negative_definite"
INDEFINITE = "indefinite"
DEGENERATE = "degenerate"

STATIONARITY_TOL = 1e-10
MAX_ITER = 100


def inner_forms(inst: ProblemInstance, x: np.ndarray) -> np.ndarray:
    """``s_j(x) = x'B_j x / 2 + c_j``; works on a single point or a batch."""
    return 0.5 * np.einsum("...a,jab,...b->...j", x, inst.B, x) + inst.c


def quartic_terms(inst: ProblemInstance, x) -> np.ndarray:
    """Per-term contributions ``gamma_j/2 s_j(x)^2`` (all nonnegative)."""
    x = inst.check_vector(x)
    return 0.5 * inst.gamma * inner_forms(inst, x) ** 2


def eval_J(inst: ProblemInstance, x) -> float | np.ndarray:
    """J at ``x``. A 2-D ``x`` is treated as a batch of row vectors."""
    x = inst.check_vector(x)
    quad = 0.5 * np.einsum("...a,ab,...b->...", x, inst.A, x)
    s = inner_forms(inst, x)
    val = quad + 0.5 * (inst.gamma * s**2).sum(axis=-1) - x @ inst.f
    return float(val) if x.ndim == 1 else val


def grad_J(inst: ProblemInstance, x) -> np.ndarray:
    x = inst.check_vector(x)
    s = inner_forms(inst, x)
    Bx = inst.B @ x  # (N, n)
    return inst.A @ x + (inst.gamma * s) @ Bx - inst.f


def hess_J(inst: ProblemInstance, x) -> np.ndarray:
    x = inst.check_vector(x)
    s = inner_forms(inst, x)
    Bx = inst.B @ x
    H = inst.A + np.einsum("j,jab->ab", inst.gamma * s, inst.B) \
        + np.einsum("j,ja,jb->ab", inst.gamma, Bx, Bx)
    return symmetrize_upper(H)


@dataclass(frozen=True)
class HessianClass:
    label: str
    lambda_min: float
    lambda_max: float
    threshold: float


def classify_hessian(H: np.ndarray, scale: float | None = None) -> HessianClass:
    """Sign pattern of a symmetric matrix, with eigenvalue margins.

    Eigenvalues within ``PD_TOL * scale`` of zero make the matrix
    ``degenerate``; ``scale`` defaults to ``1 + ||H||_2``.
    """
    w = np.linalg.eigvalsh(H)
    lo, hi = float(w[0]), float(w[-1])
    if scale is None:
        scale = 1.0 + max(abs(lo), abs(hi))
    tol = PD_TOL * scale
    if lo > tol:
        label = POSITIVE_DEFINITE
    elif hi < -tol:
        label = NEGATIVE_DEFINITE
    elif np.any(np.abs(w) <= tol):
        label = DEGENERATE
    else:
        label = INDEFINITE
    return HessianClass(label, lo, hi, tol)


@dataclass(frozen=True)
class PrimalPoint:
    x0: np.ndarray
    value: float
    grad_norm: float
    hessian_class: str
    lambda_min: float
    lambda_max: float
    iterations: int
    converged: bool


def _newton_step(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    scale = 1.0 + np.abs(H).sum(axis=1).max()
    lu, piv = sla.lu_factor(H, check_finite=False)
    if np.abs(np.diag(lu)).min() >= 1e-14 * scale:
        return sla.lu_solve((lu, piv), -g, check_finite=False)
    mu = 1e-8 * scale
    eye = np.eye(len(g))
    for _ in range(200):
        lu, piv = sla.lu_factor(H + mu * eye, check_finite=False)
        if np.abs(np.diag(lu)).min() >= 1e-14 * scale:
            return sla.lu_solve((lu, piv), -g, check_finite=False)
        mu *= 2.0
    raise np.linalg.LinAlgError("regularized Newton system stayed singular")


def _damped_newton(inst, x, g, gn, target, budget):
    """Newton on the residual; returns (x, g, gn, iterations, stalled)."""
    it = 0
    while gn > target and it < budget and np.isfinite(gn):
        it += 1
        try:
            s = _newton_step(hess_J(inst, x), g)
        except np.linalg.LinAlgError:
            return x, g, gn, it, True
        t = 1.0
        for _ in range(31):
            x_new = x + t * s
            g_new = grad_J(inst, x_new)
            gn_new = np.linalg.norm(g_new)
            if gn_new < gn:
                break
            t *= 0.5
        else:
            # residual has a local minimum here with gn > 0
            return x, g, gn, it, True
        x, g, gn = x_new, g_new, gn_new
    return x, g, gn, it, False


def find_critical_point(inst: ProblemInstance, x_init, tol: float = STATIONARITY_TOL,
                        max_iter: int = MAX_ITER) -> PrimalPoint:
    """Damped Newton on ``grad_J(x) = 0``.

    The merit function is ``||grad_J||``, not J, so the iteration is
    attracted to minima, maxima and saddles alike. If it stalls at a
    nonzero local minimum of the residual, a BFGS descent on J from the
    stall point (sharing the same iteration budget) moves it into the
    basin of a local minimizer, and Newton resumes from there.
    Convergence means ``||grad_J(x0)|| <= tol * (1 + ||f||)``; once
    reached, a few extra Newton steps are taken while they keep lowering
    the residual. Non-convergence is reported in the result, never raised.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = inst.check_vector(x_init).astype(float).copy()
    target = tol * (1.0 + np.linalg.norm(inst.f))
    g = grad_J(inst, x)
    gn = np.linalg.norm(g)
    x, g, gn, it, stalled = _damped_newton(inst, x, g, gn, target, max_iter)
    if stalled and gn > target and it < max_iter:
        res = optimize.minimize(lambda y: eval_J(inst, y), x, jac=lambda y: grad_J(inst, y),
                                method="BFGS", options={"maxiter": max_iter - it, "gtol": 1e-6})
        it += max(int(res.nit), 1)
        if np.all(np.isfinite(res.x)):
            g_try = grad_J(inst, res.x)
            gn_try = np.linalg.norm(g_try)
            if gn_try < gn:
                x, g, gn = res.x, g_try, gn_try
        if it < max_iter:
            x, g, gn, extra, _ = _damped_newton(inst, x, g, gn, target, max_iter - it)
            it += extra

    converged = bool(gn <= target)
    if converged:
        for _ in range(3):
            if gn == 0.0:
                break
            try:
                x_new = x + _newton_step(hess_J(inst, x), g)
            except np.linalg.LinAlgError:
                break
            g_new = grad_J(inst, x_new)
            if not np.linalg.norm(g_new) < gn:
                break
            x, g, gn = x_new, g_new, np.linalg.norm(g_new)

    if np.all(np.isfinite(x)):
        hc = classify_hessian(hess_J(inst, x))
        value = eval_J(inst, x)
    else:
        hc = HessianClass(DEGENERATE, float("nan"), float("nan"), float("nan"))
        value = float("nan")
    return PrimalPoint(x0=x, value=value, grad_norm=float(gn), hessian_class=hc.label,
                       lambda_min=hc.lambda_min, lambda_max=hc.lambda_max,
                       iterations=it, converged=converged)
