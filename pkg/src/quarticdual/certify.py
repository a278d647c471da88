"""Numerical certificates for the primal/dual correspondence at a critical point.

At a critical point ``x0`` of J the dual point is built as

    v0_hat = gamma * (x0'B x0 / 2 + c),   v_hat = M(v0_hat, K) x0,

and the certificate records the duality gap ``J(x0) - J*(v_hat, v0_hat)``,
the residual of ``grad J*`` there, and sampled evidence for the local
(or global) extremal structure selected by the second variation and by
membership of ``v0_hat`` in A+*, A-* and E*.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from . import __version__
from ._linalg import PreconditionError, SPDFactor, batched_spd_solve, extreme_eigs
from .dual import (
    ConeMembership,
    DualPoint,
    KSelection,
    cone_membership,
    eval_Jstar,
    eval_Jstar_many,
    grad_Jstar,
    hat_v,
    hat_v0,
    hess_Jstar_v0,
    k_margins,
    r2_default,
    select_K,
)
from .instance import ProblemInstance, instance_digest
from .primal import (
    NEGATIVE_DEFINITE,
    POSITIVE_DEFINITE,
    DEGENERATE,
    PrimalPoint,
    classify_hessian,
    eval_J,
    find_critical_point,
    grad_J,
    hess_J,
    inner_forms,
)

CERTIFICATE_FORMAT = "1"

ITEM1 = "item1_local_min"
ITEM2 = "item2_global_min"
ITEM3 = "item3_local_max"
DEGENERATE_CASE = "degenerate"
UNCLASSIFIED = "unclassified"

ARGMAX_SHIFT_TOL = 1e-8

# sub-stream ids for the sampling RNG
_STREAM_CASE1, _STREAM_CASE2, _STREAM_CASE3, _STREAM_LEGENDRE = 1, 2, 3, 4


class CasePreconditionError(ValueError):
    """The hypothesis of the requested extremal case does not hold at x0."""


class NonCriticalPointWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CertifyConfig:
    r: float | None = None
    r1: float | None = None
    r2: float | None = None
    samples: int = 10_000
    seed: int = 0
    gap_tol: float = 1e-9
    stat_tol: float = 1e-8
    multistart: int = 32
    K: float | None = None
    newton_tol: float = 1e-10
    max_iter: int = 100
    legendre_tol: float = 1e-9

    def __post_init__(self):
        for name in ("r", "r1", "r2", "K"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ValueError(f"{name} must be positive, got {val}")
        for name in ("gap_tol", "stat_tol", "newton_tol", "legendre_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.multistart < 0 or self.max_iter < 1:
            raise ValueError("multistart must be >= 0 and max_iter >= 1")


@dataclass
class SamplingRecord:
    checked: int
    violations: int
    worst_margin: float
    notes: dict[str, Any] = field(default_factory=dict)


def _record(margins: np.ndarray, slack: float, **notes) -> SamplingRecord:
    margins = np.asarray(margins, dtype=float)
    worst = float(margins.min()) if margins.size else float("inf")
    return SamplingRecord(int(margins.size), int(np.sum(margins < -slack)), worst, dict(notes))


def _rng(cfg: CertifyConfig, stream: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, stream])


def uniform_ball(rng: np.random.Generator, center: np.ndarray, radius: float, size: int) -> np.ndarray:
    """``size`` points uniform in the Euclidean ball around ``center``."""
    d = len(center)
    u = rng.standard_normal((size, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    rad = radius * rng.random(size) ** (1.0 / d)
    return center + rad[:, None] * u


def slack_for(J0: float) -> float:
    return 1e-10 * (1.0 + abs(J0))


@dataclass(frozen=True)
class Radii:
    r: float
    r1: float
    r2: float


def resolve_radii(cfg: CertifyConfig, x0: np.ndarray, dp: DualPoint) -> Radii:
    return Radii(
        cfg.r if cfg.r is not None else 0.05 * (1.0 + np.linalg.norm(x0)),
        cfg.r1 if cfg.r1 is not None else 0.05 * (1.0 + np.linalg.norm(dp.v_star)),
        cfg.r2 if cfg.r2 is not None else r2_default(dp.v0_star),
    )


# ---------------------------------------------------------------------------
# gap and stationarity


@dataclass(frozen=True)
class GapCheck:
    gap_abs: float
    gap_rel: float
    primal_value: float
    dual_value: float
    grad_norm: float
    # J(x0) - J*(v_hat, v0_hat) = g'(K I + A)^{-1} g / 2 for g = grad_J(x0)
    predicted_gap: float
    noncritical: bool


def check_zero_gap(inst: ProblemInstance, x0, K: float, crit_tol: float = 1e-8) -> GapCheck:
    """Duality gap at the dual point induced by ``x0``.

    The gap is only claimed at critical points. When ``||grad_J(x0)||``
    exceeds ``crit_tol * (1 + ||f||)`` the check still runs but flags the
    result and emits a ``NonCriticalPointWarning``.
    """
    x0 = inst.check_vector(x0, what="x0")
    v0 = hat_v0(inst, x0)
    v = hat_v(inst, x0, v0, K)
    J0 = eval_J(inst, x0)
    try:
        Js = eval_Jstar(inst, v, v0, K)
    except PreconditionError as exc:
        raise PreconditionError(exc.matrix, exc.lambda_min, "check_zero_gap") from None
    g = grad_J(inst, x0)
    gn = float(np.linalg.norm(g))
    noncritical = gn > crit_tol * (1.0 + np.linalg.norm(inst.f))
    if noncritical:
        warnings.warn(f"x0 is not a critical point (||grad J|| = {gn:.3g}); "
                      "the zero-gap identity is not expected", NonCriticalPointWarning, stacklevel=2)
    predicted = 0.5 * float(g @ SPDFactor(K * np.eye(inst.n) + inst.A, "K I + A").solve(g))
    gap = abs(J0 - Js)
    return GapCheck(gap, gap / (1.0 + abs(J0)), J0, Js, gn, predicted, bool(noncritical))


def check_dual_stationarity(inst: ProblemInstance, x0, K: float) -> float:
    """``||grad J*||`` at the dual point induced by ``x0``.

    Its v_star block equals ``(K I + A)^{-1} grad_J(x0)`` and its v0 block
    vanishes identically, so the residual is at most
    ``||grad_J(x0)|| / lambda_min(K I + A)``.
    """
    x0 = inst.check_vector(x0, what="x0")
    v0 = hat_v0(inst, x0)
    g_v, g_v0 = grad_Jstar(inst, hat_v(inst, x0, v0, K), v0, K)
    return float(np.sqrt(g_v @ g_v + g_v0 @ g_v0))


# ---------------------------------------------------------------------------
# inner supremum over v0


@dataclass(frozen=True)
class InnerSup:
    value: float
    argmax: np.ndarray
    iterations: int
    converged: bool


def inner_sup(inst: ProblemInstance, v_star: np.ndarray, center: np.ndarray, radius: float,
              K: float, start: np.ndarray | None = None,
              admissible: Callable[[np.ndarray], bool] | None = None,
              max_iter: int = 50) -> InnerSup:
    """Maximize ``J*(v_star, .)`` over the ball ``B_radius(center)``.

    Newton ascent with ``hess_Jstar_v0``; trial points are projected onto
    the ball and must satisfy ``admissible`` (if given). A trial is accepted
    when it raises the value, or leaves it unchanged to rounding while
    shrinking the gradient. The returned value is therefore never below the
    starting value by more than rounding.
    """
    v0 = np.array(center if start is None else start, dtype=float)

    def project(u):
        d = u - center
        nd = np.linalg.norm(d)
        return u if nd <= radius else center + d * (radius / nd)

    def evaluate(u):
        if admissible is not None and not admissible(u):
            return None
        try:
            return eval_Jstar(inst, v_star, u, K), grad_Jstar(inst, v_star, u, K)[1]
        except PreconditionError:
            return None

    cur = evaluate(v0)
    if cur is None:
        raise CasePreconditionError("inner_sup start point is outside the admissible set")
    val, g = cur
    # J* is a difference of quadratics of size ~ |v|^2 / K; its rounding
    # noise, not |J*|, sets when two values count as equal
    noise = 1e-14 * (1.0 + abs(val) + (v_star @ v_star + (v_star + inst.f) @ (v_star + inst.f)) / K)
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        gn = np.linalg.norm(g)
        if gn <= 1e-13 * (1.0 + abs(val)):
            converged = True
            break
        H = hess_Jstar_v0(inst, v_star, v0, K)
        if extreme_eigs(H)[1] < 0:
            d = np.linalg.solve(H, -g)
        else:
            d = g / (1.0 + np.abs(H).sum(axis=1).max())
        t = 1.0
        accepted = False
        for _ in range(40):
            cand = project(v0 + t * d)
            res = evaluate(cand)
            if res is not None:
                cval, cg = res
                if cval > val or (cval >= val - noise and np.linalg.norm(cg) < gn):
                    v0, val, g = cand, cval, cg
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            # no admissible improvement left; at a (possibly boundary) maximizer
            converged = True
            break
    return InnerSup(float(val), v0, it, converged)


# ---------------------------------------------------------------------------
# case verifiers


def verify_case1(inst: ProblemInstance, x0, dual_point: DualPoint, cfg: CertifyConfig
                 ) -> dict[str, SamplingRecord]:
    """Sampled evidence for the local-minimum case.

    primal_ball
        ``J(x) >= J(x0) - slack`` on the ball of radius r.
    dual_inf_sup
        For v_star in the ball of radius r1 around v_hat, the sup of J* over
        the v0 ball of radius r2 is ``>= J*(v_hat, v0_hat) - slack``. Each
        sample first tries the feasible point v0_hat; Newton ascent runs only
        where that lower bound is not already enough.
    inner_sup_at_dual
        At v_star = v_hat the ascent, started off-centre, returns the value
        ``J*(v_hat, v0_hat)`` and a maximizer within 1e-8 of v0_hat.
    """
    x0 = inst.check_vector(x0, what="x0")
    hc = classify_hessian(hess_J(inst, x0))
    if hc.label != POSITIVE_DEFINITE:
        raise CasePreconditionError(f"local-min case needs a positive definite Hessian, got {hc.label}")
    rad = resolve_radii(cfg, x0, dual_point)
    v_hat, v0_hat, K = dual_point.v_star, dual_point.v0_star, dual_point.K
    J0 = eval_J(inst, x0)
    slack = slack_for(J0)
    ref = eval_Jstar(inst, v_hat, v0_hat, K)
    rng = _rng(cfg, _STREAM_CASE1)

    X = uniform_ball(rng, x0, rad.r, cfg.samples)
    primal = _record(eval_J(inst, X) - J0, slack)

    V = uniform_ball(rng, v_hat, rad.r1, cfg.samples)
    best, _ = eval_Jstar_many(inst, V, v0_hat, K)
    newton_runs = nonconv = 0
    for i in np.flatnonzero(best - ref < -slack):
        sup = inner_sup(inst, V[i], v0_hat, rad.r2, K)
        newton_runs += 1
        nonconv += not sup.converged
        best[i] = max(best[i], sup.value)
    dual = _record(best - ref, slack, newton_runs=newton_runs, newton_nonconverged=nonconv)

    u = np.ones(inst.N) / np.sqrt(inst.N)
    sup = inner_sup(inst, v_hat, v0_hat, rad.r2, K, start=v0_hat + 0.5 * rad.r2 * u)
    shift = float(np.linalg.norm(sup.argmax - v0_hat))
    at_dual = SamplingRecord(1, int(abs(sup.value - ref) > slack or shift > ARGMAX_SHIFT_TOL),
                             -abs(sup.value - ref), {"argmax_shift": shift})
    return {"primal_ball": primal, "dual_inf_sup": dual, "inner_sup_at_dual": at_dual}


def verify_case2(inst: ProblemInstance, x0, dual_point: DualPoint, cfg: CertifyConfig
                 ) -> dict[str, SamplingRecord]:
    """Evidence for the global-minimum case (v0_hat in E*).

    multistart
        Critical points found from ``cfg.multistart`` random starts; none may
        have a value below ``J(x0) - slack``. This is evidence, not proof.
    dual_inf_sup
        v_star sampled in a ball of radius ``10 (1 + ||v_hat||)``; the sup of
        J* over the r2-ball around v0_hat intersected with E* must reach
        ``J*(v_hat, v0_hat) - slack``.
    dual_stationarity_v
        The v_star block of ``grad J*`` vanishes at the dual point.
    """
    x0 = inst.check_vector(x0, what="x0")
    v_hat, v0_hat, K = dual_point.v_star, dual_point.v0_star, dual_point.K
    if not cone_membership(inst, v0_hat, K).in_Estar:
        raise CasePreconditionError("global-min case needs v0_hat in E* = A+* intersect B*")
    rad = resolve_radii(cfg, x0, dual_point)
    J0 = eval_J(inst, x0)
    slack = slack_for(J0)
    ref = eval_Jstar(inst, v_hat, v0_hat, K)
    rng = _rng(cfg, _STREAM_CASE2)

    sigma = 2.0 * (1.0 + np.linalg.norm(x0))
    values, nonconv = [], 0
    for _ in range(cfg.multistart):
        pt = find_critical_point(inst, sigma * rng.standard_normal(inst.n),
                                 cfg.newton_tol, cfg.max_iter)
        if pt.converged:
            values.append(pt.value)
        else:
            nonconv += 1
    values = np.array(values)
    multistart = _record(values - J0, slack, critical_values=sorted(set(np.round(values, 12).tolist())),
                         nonconverged=nonconv)

    def in_E(u):
        return cone_membership(inst, u, K).in_Estar

    V = uniform_ball(rng, v_hat, 10.0 * (1.0 + np.linalg.norm(v_hat)), cfg.samples)
    best, _ = eval_Jstar_many(inst, V, v0_hat, K)
    newton_runs = 0
    for i in np.flatnonzero(best - ref < -slack):
        best[i] = max(best[i], inner_sup(inst, V[i], v0_hat, rad.r2, K, admissible=in_E).value)
        newton_runs += 1
    dual = _record(best - ref, slack, newton_runs=newton_runs)

    g_v, _ = grad_Jstar(inst, v_hat, v0_hat, K)
    gv = float(np.linalg.norm(g_v))
    stat = SamplingRecord(1, int(gv > cfg.stat_tol), -gv)
    return {"multistart": multistart, "dual_inf_sup": dual, "dual_stationarity_v": stat}


def verify_case3(inst: ProblemInstance, x0, dual_point: DualPoint, cfg: CertifyConfig
                 ) -> dict[str, SamplingRecord]:
    """Sampled evidence for the local-maximum case.

    primal_ball: ``J(x) <= J(x0) + slack`` on the r-ball. dual_joint_sup:
    ``J*(v_star, v0) <= J*(v_hat, v0_hat) + slack`` for joint samples in the
    r1-ball times the r2-ball.
    """
    x0 = inst.check_vector(x0, what="x0")
    hc = classify_hessian(hess_J(inst, x0))
    v_hat, v0_hat, K = dual_point.v_star, dual_point.v0_star, dual_point.K
    if hc.label != NEGATIVE_DEFINITE:
        raise CasePreconditionError(f"local-max case needs a negative definite Hessian, got {hc.label}")
    if not cone_membership(inst, v0_hat, K).in_Aminus:
        raise CasePreconditionError("local-max case needs v0_hat in A-*")
    rad = resolve_radii(cfg, x0, dual_point)
    J0 = eval_J(inst, x0)
    slack = slack_for(J0)
    ref = eval_Jstar(inst, v_hat, v0_hat, K)
    rng = _rng(cfg, _STREAM_CASE3)

    X = uniform_ball(rng, x0, rad.r, cfg.samples)
    primal = _record(J0 - eval_J(inst, X), slack)

    V = uniform_ball(rng, v_hat, rad.r1, cfg.samples)
    V0 = uniform_ball(rng, v0_hat, rad.r2, cfg.samples)
    vals, ok = eval_Jstar_many(inst, V, V0, K)
    dual = _record(ref - vals[ok], slack, outside_domain=int((~ok).sum()))
    return {"primal_ball": primal, "dual_joint_sup": dual}


# ---------------------------------------------------------------------------
# Legendre identities


@dataclass(frozen=True)
class LegendreErrors:
    L1: float
    L2: float
    L3: float
    checked: int
    skipped: int


def _rel(a, b):
    return np.abs(a - b) / (1.0 + np.maximum(np.abs(a), np.abs(b)))


def check_legendre_identities(inst: ProblemInstance, cfg: CertifyConfig,
                              points: int | None = None) -> LegendreErrors:
    """Worst relative errors of the three partial-optimization identities.

    L1: ``J1(x, v0_hat(x)) = J(x)`` and ``dJ1/dv0 = 0`` there.
    L2: ``J2(x, M x, v0) = J1(x, v0)`` and ``dJ2/dv_star = 0`` at ``M x``.
    L3: ``J2(x_hat, v_star, v0) = J*(v_star, v0)`` and ``dJ2/dx = 0`` at
    ``x_hat = (K I + A)^{-1}(v_star + f)``.

    Points are random; each gets its own K clearing both positivity
    requirements by at least 1. Points where a factorization still fails
    are skipped and counted.
    """
    S = cfg.samples if points is None else points
    n, N = inst.n, inst.N
    rng = _rng(cfg, _STREAM_LEGENDRE)
    X = rng.standard_normal((S, n))
    V0 = rng.standard_normal((S, N)) * (1.0 + np.abs(inst.gamma * inst.c))
    Vs = rng.standard_normal((S, n))
    WB = np.einsum("sj,jab->sab", V0, inst.B)
    K = 1.0 + np.maximum(0.0, np.maximum(np.linalg.eigvalsh(WB)[:, -1],
                                         np.linalg.eigvalsh(-inst.A)[-1])) + rng.exponential(1.0, S)
    eye = np.eye(n)
    Ms = K[:, None, None] * eye - WB
    Ss = K[:, None, None] * eye + inst.A
    Vs *= 1.0 + K[:, None]

    def quad(P, Q, R):
        return np.einsum("sa,ab,sb->s", P, Q, R)

    s = inner_forms(inst, X)
    f = inst.f
    J = 0.5 * quad(X, inst.A, X) + 0.5 * (inst.gamma * s**2).sum(1) - X @ f

    def J1(X, V0, s):
        return 0.5 * quad(X, inst.A, X) + (V0 * s).sum(1) - 0.5 * (V0**2 / inst.gamma).sum(1) - X @ f

    def dual_pen(V0):
        return (-0.5 * V0**2 / inst.gamma + V0 * inst.c).sum(1)

    def J2(X, Vst, V0, W):
        # W = M^{-1} Vst, supplied by a factorization solve
        return (0.5 * quad(X, inst.A, X) - X @ f + 0.5 * (Vst * W).sum(1)
                - (Vst * X).sum(1) + 0.5 * K * (X * X).sum(1) + dual_pen(V0))

    V0_hat = inst.gamma * s
    l1 = np.maximum(_rel(J1(X, V0_hat, s), J),
                    np.abs(s - V0_hat / inst.gamma).max(1) / (1.0 + np.abs(s).max(1)))

    MX = np.einsum("sab,sb->sa", Ms, X)
    W, ok_m = batched_spd_solve(Ms, MX)
    l2 = np.maximum(_rel(J2(X, MX, V0, W), J1(X, V0, s)),
                    np.abs(W - X).max(1) / (1.0 + np.abs(X).max(1)))

    X_hat, ok_s = batched_spd_solve(Ss, Vs + f)
    W3, ok_m3 = batched_spd_solve(Ms, Vs)
    Jstar = -0.5 * ((Vs + f) * X_hat).sum(1) + 0.5 * (Vs * W3).sum(1) + dual_pen(V0)
    grad_x = X_hat @ inst.A - f - Vs + K[:, None] * X_hat
    l3 = np.maximum(_rel(J2(X_hat, Vs, V0, W3), Jstar),
                    np.abs(grad_x).max(1) / (1.0 + np.abs(Vs).max(1) + np.abs(f).max()))

    ok = ok_m & ok_s & ok_m3
    if not ok.any():
        return LegendreErrors(float("nan"), float("nan"), float("nan"), 0, S)
    return LegendreErrors(float(l1.max()), float(l2[ok].max()), float(l3[ok].max()),
                          int(ok.sum()), int(S - ok.sum()))


# ---------------------------------------------------------------------------
# orchestration


@dataclass
class Certificate:
    instance_digest: str
    x_init: list[float]
    config: dict[str, Any]
    primal: PrimalPoint
    dual: DualPoint | None = None
    membership: ConeMembership | None = None
    k_rule: KSelection | None = None
    primal_value: float | None = None
    dual_value: float | None = None
    gap_abs: float | None = None
    gap_rel: float | None = None
    dual_stationarity: float | None = None
    stationarity_bound: float | None = None
    case_label: str = UNCLASSIFIED
    sampling: dict[str, SamplingRecord] = field(default_factory=dict)
    legendre: LegendreErrors | None = None
    passed: bool = False
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        def arr(a):
            return None if a is None else np.asarray(a, dtype=float).tolist()

        p = self.primal
        doc: dict[str, Any] = {
            "spec_version": CERTIFICATE_FORMAT,
            "tool": f"quarticdual {__version__}",
            "instance_digest": self.instance_digest,
            "x_init": self.x_init,
            "config": self.config,
            "primal": {
                "x0": arr(p.x0), "value": p.value, "grad_norm": p.grad_norm,
                "hessian_class": p.hessian_class, "lambda_min": p.lambda_min,
                "lambda_max": p.lambda_max, "iterations": p.iterations, "converged": p.converged,
            },
            "dual": None if self.dual is None else {
                "v_star": arr(self.dual.v_star), "v0_star": arr(self.dual.v0_star), "K": self.dual.K,
            },
            "membership": None if self.membership is None else asdict(self.membership),
            "k_rule": None if self.k_rule is None else asdict(self.k_rule),
            "primal_value": self.primal_value,
            "dual_value": self.dual_value,
            "gap_abs": self.gap_abs,
            "gap_rel": self.gap_rel,
            "dual_stationarity": self.dual_stationarity,
            "stationarity_bound": self.stationarity_bound,
            "case_label": self.case_label,
            "sampling": {k: asdict(v) for k, v in self.sampling.items()},
            "legendre": None if self.legendre is None else asdict(self.legendre),
            "passed": self.passed,
            "diagnostics": self.diagnostics,
        }
        return _json_clean(doc)


def _json_clean(obj):
    if isinstance(obj, dict):
        return {k: _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        # JSON has no inf/nan
        return obj if np.isfinite(obj) else None
    return obj


def save_certificate(cert: Certificate) -> bytes:
    return (json.dumps(cert.to_dict(), indent=2) + "\n").encode("utf-8")


def dispatch_case(hessian_class: str, membership: ConeMembership) -> str:
    if hessian_class == POSITIVE_DEFINITE:
        return ITEM2 if membership.in_Estar else ITEM1
    if hessian_class == NEGATIVE_DEFINITE and membership.in_Aminus:
        return ITEM3
    if hessian_class == DEGENERATE:
        return DEGENERATE_CASE
    return UNCLASSIFIED


_VERIFIERS = {ITEM1: verify_case1, ITEM2: verify_case2, ITEM3: verify_case3}


def certify(inst: ProblemInstance, x_init, cfg: CertifyConfig | None = None) -> Certificate:
    """Locate a critical point from ``x_init`` and certify it.

    Non-convergence of the primal solver yields a failed certificate. A
    positive-definiteness failure (including a user-supplied ``cfg.K`` that
    is too small) raises ``PreconditionError``.

    ``passed`` requires a converged critical point, gap and stationarity
    within tolerance, Legendre errors within ``cfg.legendre_tol``, and zero
    sampling violations for whichever case applied. Degenerate and
    unclassified points carry no case claim; for them only the
    case-independent checks decide.
    """
    cfg = cfg or CertifyConfig()
    x_init = inst.check_vector(x_init, what="x_init")
    primal = find_critical_point(inst, x_init, cfg.newton_tol, cfg.max_iter)
    cert = Certificate(
        instance_digest=instance_digest(inst),
        x_init=np.asarray(x_init, dtype=float).tolist(),
        config=asdict(cfg),
        primal=primal,
    )
    if not primal.converged:
        cert.diagnostics.append(
            f"critical point search did not converge after {primal.iterations} iterations "
            f"(||grad J|| = {primal.grad_norm:.3g})")
        return cert

    x0 = primal.x0
    v0 = hat_v0(inst, x0)
    if cfg.K is None:
        krule = select_K(inst, v0, x0)
    else:
        krule = k_margins(inst, v0, cfg.K, x0)
    K = krule.K
    dp = DualPoint(hat_v(inst, x0, v0, K), v0, K)
    membership = cone_membership(inst, v0, K)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonCriticalPointWarning)
        gap = check_zero_gap(inst, x0, K)
    stat = check_dual_stationarity(inst, x0, K)
    stat_scale = 1.0 + np.linalg.norm(dp.v_star) + np.linalg.norm(inst.f)

    case = dispatch_case(primal.hessian_class, membership)
    sampling = _VERIFIERS[case](inst, x0, dp, cfg) if case in _VERIFIERS else {}
    rad = resolve_radii(cfg, x0, dp)
    cert.config.update(r=rad.r, r1=rad.r1, r2=rad.r2, K=K)
    legendre = check_legendre_identities(inst, cfg)

    cert.dual = dp
    cert.membership = membership
    cert.k_rule = krule
    cert.primal_value = gap.primal_value
    cert.dual_value = gap.dual_value
    cert.gap_abs = gap.gap_abs
    cert.gap_rel = gap.gap_rel
    cert.dual_stationarity = stat
    cert.stationarity_bound = primal.grad_norm / extreme_eigs(K * np.eye(inst.n) + inst.A)[0]
    cert.case_label = case
    cert.sampling = sampling
    cert.legendre = legendre

    checks = {
        "gap": gap.gap_rel <= cfg.gap_tol,
        "dual stationarity": stat <= cfg.stat_tol * stat_scale,
        "legendre": legendre.checked > 0 and max(legendre.L1, legendre.L2, legendre.L3) <= cfg.legendre_tol,
        "sampling": all(rec.violations == 0 for rec in sampling.values()),
    }
    for name, ok in checks.items():
        if not ok:
            cert.diagnostics.append(f"{name} check failed")
    if case in (DEGENERATE_CASE, UNCLASSIFIED):
        cert.diagnostics.append(f"no extremal case applies (Hessian {primal.hessian_class}); "
                                "only case-independent checks were run")
    cert.passed = all(checks.values())
    return cert
