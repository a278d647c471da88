"""Dual variables, the intermediate functionals J1 and J2, the dual functional
J*, and membership tests for the parameter sets B*, A+*, A-* and E*.

Notation: ``v0`` is the N-vector multiplier (one per quartic term), ``v_star``
the n-vector conjugate to the shifted primal variable, and

    M(v0, K) = K I - sum_j v0_j B_j

the anchor matrix whose resolvent appears in J2 and J*.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._linalg import PD_TOL, PreconditionError, SPDFactor, batched_spd_solve, extreme_eigs
from .instance import ProblemInstance
from .primal import inner_forms

K_DOUBLING_CAP = 60


@dataclass(frozen=True, eq=False)
class DualPoint:
    v_star: np.ndarray
    v0_star: np.ndarray
    K: float


def weighted_B(inst: ProblemInstance, v0) -> np.ndarray:
    """``sum_j v0_j B_j``."""
    return np.einsum("j,jab->ab", np.asarray(v0, dtype=float), inst.B)


def anchor_matrix(inst: ProblemInstance, v0, K: float) -> np.ndarray:
    return K * np.eye(inst.n) - weighted_B(inst, v0)


def r2_default(v0) -> float:
    """Radius of the v0 search box around a dual point."""
    return 0.1 * (1.0 + float(np.abs(v0).max()))


def hat_v0(inst: ProblemInstance, x0) -> np.ndarray:
    x0 = inst.check_vector(x0, what="x0")
    return inst.gamma * inner_forms(inst, x0)


def hat_v(inst: ProblemInstance, x0, v0, K: float) -> np.ndarray:
    x0 = inst.check_vector(x0, what="x0")
    v0 = inst.check_vector(v0, inst.N, "v0")
    return anchor_matrix(inst, v0, K) @ x0


def _dual_penalty(inst: ProblemInstance, v0: np.ndarray) -> np.ndarray:
    # -sum v0^2/(2 gamma) + sum v0 c, batched over leading axes
    return (-0.5 * v0**2 / inst.gamma + v0 * inst.c).sum(axis=-1)


def _factor_M(inst, v0, K, context=""):
    try:
        return SPDFactor(anchor_matrix(inst, v0, K), "M = K I - sum_j v0_j B_j")
    except PreconditionError as exc:
        raise PreconditionError(exc.matrix, exc.lambda_min, context) from None


def _factor_shift(inst, K, context=""):
    try:
        return SPDFactor(K * np.eye(inst.n) + inst.A, "K I + A")
    except PreconditionError as exc:
        raise PreconditionError(exc.matrix, exc.lambda_min, context) from None


def eval_J1(inst: ProblemInstance, x, v0) -> float:
    x = inst.check_vector(x)
    v0 = inst.check_vector(v0, inst.N, "v0")
    s = inner_forms(inst, x)
    return float(0.5 * x @ inst.A @ x + v0 @ s - 0.5 * (v0**2 / inst.gamma).sum() - inst.f @ x)


def eval_J2(inst: ProblemInstance, x, v_star, v0, K: float) -> float:
    """J2 evaluated through a Cholesky solve with ``M(v0, K)``."""
    x = inst.check_vector(x)
    v_star = inst.check_vector(v_star, what="v_star")
    v0 = inst.check_vector(v0, inst.N, "v0")
    Mf = _factor_M(inst, v0, K, "eval_J2")
    return float(0.5 * x @ inst.A @ x - inst.f @ x
                 + 0.5 * v_star @ Mf.solve(v_star)
                 - v_star @ x + 0.5 * K * x @ x
                 + _dual_penalty(inst, v0))


def eval_Jstar(inst: ProblemInstance, v_star, v0, K: float) -> float:
    v_star = inst.check_vector(v_star, what="v_star")
    v0 = inst.check_vector(v0, inst.N, "v0")
    Sf = _factor_shift(inst, K, "eval_Jstar")
    Mf = _factor_M(inst, v0, K, "eval_Jstar")
    p = v_star + inst.f
    return float(-0.5 * p @ Sf.solve(p) + 0.5 * v_star @ Mf.solve(v_star)
                 + _dual_penalty(inst, v0))


def grad_Jstar(inst: ProblemInstance, v_star, v0, K: float) -> tuple[np.ndarray, np.ndarray]:
    """Gradient blocks ``(dJ*/dv_star, dJ*/dv0)``."""
    v_star = inst.check_vector(v_star, what="v_star")
    v0 = inst.check_vector(v0, inst.N, "v0")
    Sf = _factor_shift(inst, K, "grad_Jstar")
    Mf = _factor_M(inst, v0, K, "grad_Jstar")
    w = Mf.solve(v_star)
    g_v = w - Sf.solve(v_star + inst.f)
    g_v0 = 0.5 * np.einsum("a,jab,b->j", w, inst.B, w) - v0 / inst.gamma + inst.c
    return g_v, g_v0


def hess_Jstar_v0(inst: ProblemInstance, v_star, v0, K: float) -> np.ndarray:
    """Hessian of J* in ``v0`` at fixed ``v_star``.

    Entry (i, j) is ``w'B_i M^{-1} B_j w - delta_ij / gamma_j`` with
    ``w = M^{-1} v_star``; the first part is a Gram matrix, so concavity
    is governed by how small ``M^{-1}`` is.
    """
    v_star = inst.check_vector(v_star, what="v_star")
    v0 = inst.check_vector(v0, inst.N, "v0")
    Mf = _factor_M(inst, v0, K, "hess_Jstar_v0")
    w = Mf.solve(v_star)
    U = (inst.B @ w).T  # (n, N), column j is B_j w
    G = U.T @ Mf.solve(U)
    G = 0.5 * (G + G.T)
    return G - np.diag(1.0 / inst.gamma)


def eval_Jstar_many(inst: ProblemInstance, V: np.ndarray, V0: np.ndarray, K: float
                    ) -> tuple[np.ndarray, np.ndarray]:
    """J* on a batch of points.

    ``V`` is (S, n). ``V0`` is either one N-vector shared by every row or an
    (S, N) array. Returns values and a mask of rows where ``M`` was positive
    definite; masked-out rows hold NaN. ``K I + A`` must be positive definite.
    """
    V = np.atleast_2d(inst.check_vector(V, what="v_star"))
    V0 = inst.check_vector(V0, inst.N, "v0")
    Sf = _factor_shift(inst, K, "eval_Jstar_many")
    P = V + inst.f
    shift_term = -0.5 * np.einsum("sa,as->s", P, Sf.solve(P.T))
    if V0.ndim == 1:
        Mf = _factor_M(inst, V0, K, "eval_Jstar_many")
        res_term = 0.5 * np.einsum("sa,as->s", V, Mf.solve(V.T))
        ok = np.ones(len(V), dtype=bool)
    else:
        Ms = K * np.eye(inst.n) - np.einsum("sj,jab->sab", V0, inst.B)
        W, ok = batched_spd_solve(Ms, V)
        res_term = 0.5 * np.einsum("sa,sa->s", V, W)
    return shift_term + res_term + _dual_penalty(inst, V0), ok


@dataclass(frozen=True)
class KSelection:
    K: float
    doublings: int
    margin_shift: float  # lambda_min(K I + A), required >= 1
    margin_box: float  # lambda_min(M(v0, K)) - r2 * sum_j ||B_j||_2, required >= 1
    margin_concavity: float  # -lambda_max(hess_Jstar_v0), required >= required_concavity
    required_concavity: float


class KSelectionError(PreconditionError):
    """The doubling sequence for K ran out without meeting the conditions."""

    def __init__(self, message: str):
        ArithmeticError.__init__(self, message)
        self.matrix = "K rule"
        self.lambda_min = float("nan")
        self.context = ""


def select_K(inst: ProblemInstance, v0, x0=None) -> KSelection:
    """Smallest ``K = K0 * 2**m`` meeting the three soundness conditions.

    (a) ``lambda_min(K I + A) >= 1``; (b) ``M(u, K)`` keeps ``lambda_min >= 1``
    for every ``u`` in the v0 box of radius ``r2_default(v0)``, via the bound
    ``lambda_min(M(v0, K)) - r2 * sum_j ||B_j||_2``; (c) the v0-Hessian of J*
    at ``v_star = M(v0, K) x0`` is negative definite with margin at least
    ``min_j(1/gamma_j) / 2``. Without ``x0``, (c) is taken at ``v_star = 0``.
    """
    v0 = inst.check_vector(v0, inst.N, "v0")
    x0 = np.zeros(inst.n) if x0 is None else inst.check_vector(x0, what="x0")
    r2 = r2_default(v0)
    S = weighted_B(inst, v0)
    B_norms = np.array([np.linalg.norm(Bj, 2) for Bj in inst.B])
    K0 = 2.0 * (1.0 + max(extreme_eigs(-inst.A)[1], extreme_eigs(S)[1],
                          float((B_norms * (np.abs(v0) + 3 * r2)).max())))
    need = 0.5 * float((1.0 / inst.gamma).min())
    eye = np.eye(inst.n)
    for m in range(K_DOUBLING_CAP + 1):
        K = K0 * 2.0**m
        shift = extreme_eigs(K * eye + inst.A)[0]
        box = extreme_eigs(K * eye - S)[0] - r2 * B_norms.sum()
        if shift < 1 or box < 1:
            continue
        H = hess_Jstar_v0(inst, hat_v(inst, x0, v0, K), v0, K)
        concavity = -extreme_eigs(H)[1]
        if concavity >= need:
            return KSelection(K, m, shift, box, concavity, need)
    raise KSelectionError(f"no admissible K after {K_DOUBLING_CAP} doublings from K0 = {K0:.6g}")


def k_margins(inst: ProblemInstance, v0, K: float, x0) -> KSelection:
    """The select_K margins evaluated at a caller-supplied ``K``."""
    v0 = inst.check_vector(v0, inst.N, "v0")
    r2 = r2_default(v0)
    B_norms = np.array([np.linalg.norm(Bj, 2) for Bj in inst.B])
    eye = np.eye(inst.n)
    shift = extreme_eigs(K * eye + inst.A)[0]
    box = extreme_eigs(K * eye - weighted_B(inst, v0))[0] - r2 * B_norms.sum()
    H = hess_Jstar_v0(inst, hat_v(inst, x0, v0, K), v0, K)
    return KSelection(K, -1, shift, box, -extreme_eigs(H)[1], 0.5 * float((1.0 / inst.gamma).min()))


@dataclass(frozen=True)
class ConeMembership:
    in_Bstar: bool
    margin_Bstar: float
    in_Aplus: bool
    margin_Aplus: float
    in_Aminus: bool
    margin_Aminus: float
    in_Estar: bool
    M_pd: bool
    margin_M: float


def _margins(S: np.ndarray) -> tuple[float, float, float]:
    lo, hi = extreme_eigs(S)
    return lo, hi, PD_TOL * (1.0 + max(abs(lo), abs(hi)))


def cone_membership(inst: ProblemInstance, v0, K: float) -> ConeMembership:
    """Extreme eigenvalues deciding membership of ``v0`` in each set.

    B* is tested exactly as its defining inequality reads,
    ``sum_j v0_j B_j + K I > K I / 2``. That is a different condition from
    invertibility of ``M``, which is reported separately as ``M_pd``.
    """
    v0 = inst.check_vector(v0, inst.N, "v0")
    S = weighted_B(inst, v0)
    eye = np.eye(inst.n)
    b_lo, _, b_tol = _margins(S + K * eye - 0.5 * K * eye)
    a_lo, a_hi, a_tol = _margins(S + inst.A)
    m_lo, _, m_tol = _margins(K * eye - S)
    in_B = b_lo > b_tol
    in_Ap = a_lo > a_tol
    return ConeMembership(
        in_Bstar=bool(in_B), margin_Bstar=b_lo,
        in_Aplus=bool(in_Ap), margin_Aplus=a_lo,
        in_Aminus=bool(a_hi < -a_tol), margin_Aminus=a_hi,
        in_Estar=bool(in_Ap and in_B),
        M_pd=bool(m_lo > m_tol), margin_M=m_lo,
    )
