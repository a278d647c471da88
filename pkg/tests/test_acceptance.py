"""Acceptance criteria. Each test prints one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import SQRT_HALF, central_diff, grid_extrema, random_pairs, rel_err
from quarticdual.certify import ITEM1, ITEM2, ITEM3, CertifyConfig, certify, check_zero_gap, check_dual_stationarity
from quarticdual.certify import verify_case1, verify_case2, verify_case3
from quarticdual.dual import (
    DualPoint,
    anchor_matrix,
    eval_J1,
    eval_J2,
    eval_Jstar,
    grad_Jstar,
    hat_v,
    hat_v0,
    hess_Jstar_v0,
    select_K,
)
from quarticdual.instance import generate_random, inst_a, inst_b, save_instance
from quarticdual.primal import eval_J, find_critical_point, grad_J, hess_J

GAP_TOL = 1e-9
STAT_TOL = 1e-8
REF_TOL = 1e-12
LEGENDRE_TOL = 1e-9
FD_TOL = 1e-5
SWEEP_SECONDS = 60.0


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def sweep():
    """Seeds 0-99, 8 Newton starts each; one record per converged critical point."""
    t0 = time.perf_counter()
    records = []
    for seed in range(100):
        n, N = 1 + seed % 8, 1 + (seed // 8) % 4
        inst = generate_random(seed, n, N, "unbiased")
        rng = np.random.default_rng(seed)
        for _ in range(8):
            pt = find_critical_point(inst, rng.standard_normal(n))
            if not pt.converged:
                continue
            v0 = hat_v0(inst, pt.x0)
            ks = select_K(inst, v0, pt.x0)
            v = hat_v(inst, pt.x0, v0, ks.K)
            records.append(dict(
                seed=seed, inst=inst, x0=pt.x0, v0=v0, v=v, ks=ks,
                gap=check_zero_gap(inst, pt.x0, ks.K),
                stat=check_dual_stationarity(inst, pt.x0, ks.K),
            ))
    return records, time.perf_counter() - t0


def test_1_zero_gap(sweep, verdict):
    records, seconds = sweep
    worst = max(r["gap"].gap_rel for r in records)
    seeds = len({r["seed"] for r in records})
    ok = worst <= GAP_TOL and seconds < SWEEP_SECONDS and len(records) > 0
    verdict(1, "zero duality gap", ok,
            f"{len(records)} critical points on {seeds} instances, worst gap_rel {worst:.2e} "
            f"(tol {GAP_TOL:g}), {seconds:.1f} s")
    assert ok


def test_2_dual_stationarity(sweep, verdict):
    records, _ = sweep
    ratios = [r["stat"] / (1 + np.linalg.norm(r["v"]) + np.linalg.norm(r["inst"].f)) for r in records]
    worst = max(ratios)
    ok = worst <= STAT_TOL
    verdict(2, "dual stationarity", ok, f"worst ||grad J*|| / (1 + ||v|| + ||f||) = {worst:.2e} (tol {STAT_TOL:g})")
    assert ok


def test_3_reference_values(verdict):
    # brute-force grid first
    mins_a, maxs_a = grid_extrema(1.0, 2.0, 1.0, -1.0)
    mins_b, maxs_b = grid_extrema(1.0, 2.0, 1.0, 1.0)
    grid_ok = (len(mins_a) == 2 and len(maxs_a) == 1 and len(mins_b) == 1 and not maxs_b
               and all(abs(abs(x) - SQRT_HALF) <= 1e-4 and abs(J - 0.375) <= 1e-7 for x, J in mins_a)
               and abs(maxs_a[0][1] - 0.5) <= 1e-12 and abs(mins_b[0][1] - 0.5) <= 1e-12)

    runs = [
        (inst_a(), [0.6], ITEM1, SQRT_HALF, 0.375),
        (inst_a(), [-0.6], ITEM1, -SQRT_HALF, 0.375),
        (inst_a(), [0.0], ITEM3, 0.0, 0.5),
        (inst_b(), [0.7], ITEM2, 0.0, 0.5),
    ]
    details, ok = [], grid_ok
    for inst, x_init, label, x_exp, J_exp in runs:
        cert = certify(inst, x_init)
        good = (cert.passed and cert.case_label == label
                and abs(cert.primal.x0[0] - x_exp) <= 1e-12
                and abs(cert.primal_value - J_exp) <= REF_TOL
                and abs(cert.dual_value - J_exp) <= REF_TOL)
        ok &= good
        details.append(f"{inst.name} x0={cert.primal.x0[0]:+.6f} J={cert.primal_value:.15g} {cert.case_label}")
    verdict(3, "reference oracle values", ok, f"grid oracle {'ok' if grid_ok else 'MISMATCH'}; " + "; ".join(details))
    assert ok


def test_4_legendre_identities(verdict):
    worst = {"L1": 0.0, "L2": 0.0, "L3": 0.0}
    for seed in range(20):
        inst = generate_random(500 + seed, 1 + seed % 8, 1 + seed % 4)
        rng = np.random.default_rng(seed)
        for _ in range(100):
            x = rng.standard_normal(inst.n)
            J = eval_J(inst, x)
            worst["L1"] = max(worst["L1"], abs(eval_J1(inst, x, hat_v0(inst, x)) - J) / (1 + abs(J)))

            v0 = rng.standard_normal(inst.N)
            K = select_K(inst, v0).K
            J1 = eval_J1(inst, x, v0)
            J2 = eval_J2(inst, x, anchor_matrix(inst, v0, K) @ x, v0, K)
            worst["L2"] = max(worst["L2"], abs(J2 - J1) / (1 + abs(J1)))

            v = (1 + K) * rng.standard_normal(inst.n)
            x_hat = np.linalg.solve(K * np.eye(inst.n) + inst.A, v + inst.f)
            Js = eval_Jstar(inst, v, v0, K)
            worst["L3"] = max(worst["L3"], abs(eval_J2(inst, x_hat, v, v0, K) - Js) / (1 + abs(Js)))
    ok = max(worst.values()) <= LEGENDRE_TOL
    verdict(4, "Legendre identities", ok,
            ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + f" over 20 instances x 100 points (tol {LEGENDRE_TOL:g})")
    assert ok


def test_5_derivatives(verdict):
    worst = dict(grad_J=0.0, hess_J=0.0, grad_Jstar=0.0, hess_Jstar_v0=0.0)
    rng = np.random.default_rng(55)
    count = 0
    for inst, x in random_pairs(100, seed=55):
        count += 1
        h = 1e-6 * (1 + np.linalg.norm(x))
        worst["grad_J"] = max(worst["grad_J"], rel_err(central_diff(lambda y: eval_J(inst, y), x, h), grad_J(inst, x)))
        worst["hess_J"] = max(worst["hess_J"], rel_err(central_diff(lambda y: grad_J(inst, y), x, h), hess_J(inst, x)))

        v0 = rng.standard_normal(inst.N)
        K = select_K(inst, v0).K
        v = anchor_matrix(inst, v0, K) @ x + rng.standard_normal(inst.n)
        g_v, g_v0 = grad_Jstar(inst, v, v0, K)
        hv = 1e-6 * (1 + np.linalg.norm(v))
        h0 = 1e-6 * (1 + np.linalg.norm(v0))
        err = max(rel_err(central_diff(lambda u: eval_Jstar(inst, u, v0, K), v, hv), g_v),
                  rel_err(central_diff(lambda u: eval_Jstar(inst, v, u, K), v0, h0), g_v0))
        worst["grad_Jstar"] = max(worst["grad_Jstar"], err)
        fd = central_diff(lambda u: grad_Jstar(inst, v, u, K)[1], v0, h0)
        worst["hess_Jstar_v0"] = max(worst["hess_Jstar_v0"], rel_err(fd, hess_Jstar_v0(inst, v, v0, K)))
    ok = max(worst.values()) <= FD_TOL
    verdict(5, "derivatives vs central differences", ok,
            ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + f" on {count} pairs (tol {FD_TOL:g})")
    assert ok


def _dual_point(inst, x0):
    v0 = hat_v0(inst, x0)
    K = select_K(inst, v0, x0).K
    return DualPoint(hat_v(inst, x0, v0, K), v0, K)


def test_6_case_sampling(verdict):
    cfg = CertifyConfig(samples=10_000)
    a, b = inst_a(), inst_b()
    runs = {
        "INST-A item1 x0=+1/sqrt2": verify_case1(a, [SQRT_HALF], _dual_point(a, [SQRT_HALF]), cfg),
        "INST-A item1 x0=-1/sqrt2": verify_case1(a, [-SQRT_HALF], _dual_point(a, [-SQRT_HALF]), cfg),
        "INST-A item3 x0=0": verify_case3(a, [0.0], _dual_point(a, [0.0]), cfg),
        "INST-B item2 x0=0": verify_case2(b, [0.0], _dual_point(b, [0.0]), cfg),
    }
    violations = {k: sum(r.violations for r in recs.values()) for k, recs in runs.items()}
    control = verify_case3(a, [0.0], _dual_point(a, [0.0]), CertifyConfig(samples=10_000, r=2.0))
    ok = all(v == 0 for v in violations.values()) and control["primal_ball"].violations > 0
    verdict(6, "case sampling", ok,
            "; ".join(f"{k}: {v} violations" for k, v in violations.items())
            + f"; locality control r=2: {control['primal_ball'].violations} violations")
    assert ok


def test_7_K_rule(sweep, verdict):
    records, _ = sweep
    worst_conc = np.inf
    worst_shift = worst_M = np.inf
    for r in records:
        inst, ks = r["inst"], r["ks"]
        H = hess_Jstar_v0(inst, r["v"], r["v0"], ks.K)
        need = 0.5 * (1 / inst.gamma).min()
        worst_conc = min(worst_conc, -np.linalg.eigvalsh(H)[-1] - need)
        worst_shift = min(worst_shift, np.linalg.eigvalsh(ks.K * np.eye(inst.n) + inst.A)[0])
        worst_M = min(worst_M, np.linalg.eigvalsh(anchor_matrix(inst, r["v0"], ks.K))[0])
    ok = worst_conc >= 0 and worst_shift >= 1 and worst_M >= 1
    verdict(7, "K rule soundness", ok,
            f"min concavity surplus {worst_conc:.3e}, min lambda(K I + A) {worst_shift:.3f}, "
            f"min lambda(M) {worst_M:.3f} over {len(records)} dual points")
    assert ok


def test_8_determinism(tmp_path, verdict):
    inputs = [("a", inst_a(), "0.6"), ("a", inst_a(), "zero"), ("b", inst_b(), "0.7")]
    identical = []
    for tag, inst, x in inputs:
        path = tmp_path / f"{tag}.json"
        path.write_bytes(save_instance(inst))
        outputs = []
        for rep in range(3):
            out = tmp_path / f"{tag}-{x}-{rep}.json"
            proc = subprocess.run([sys.executable, "-m", "quarticdual", "certify", "--instance", str(path),
                                   "--x-init", x, "--out", str(out)], capture_output=True)
            assert proc.returncode == 0, proc.stderr.decode()
            outputs.append(out.read_bytes())
        identical.append(len(set(outputs)) == 1)
    ok = all(identical)
    verdict(8, "determinism", ok, f"{sum(identical)}/{len(identical)} reference runs byte-identical over 3 repetitions")
    assert ok
