"""End-to-end acceptance checks; each test reports one PASS/FAIL line."""
import math
import os
import time

import numpy as np
import pytest

from svstab.evans import EvansConfig, evans_lopatinsky, evans_lopatinsky_details, evans_smooth
from svstab.frequency import endstate_matrices, gamma_minus, gamma_plus
from svstab.fv import Grid, Perturbation, SimConfig, evolve_perturbed, step
from svstab.model import ModelParams, State, jacobian_A, relaxation_E, symmetrizer_A0
from svstab.profile import Case, classify, critical_height, derive_constants
from svstab.sweep import SweepSpec, format_rows, sweep
from svstab.winding import (
    STABLE,
    build_contour,
    circle_contour,
    stability_verdict,
    winding_details,
)
from svstab.evans import determinant_for

from conftest import random_subshock_pairs, record_criterion

# (F, H_R) = (1.5, 0.2) at 40 digits, from closed forms in H_R alone
REFERENCE = {
    "c": 1.1381966011250105152,
    "q0": 0.13819660112501051518,
    "H_3": 0.095491502812526287949,
    "H_s": 0.35026150868468385354,
    "H_star": 0.56310765540473765199,
}


def _check(number, ok, detail):
    record_criterion(number, bool(ok), detail)
    assert ok, detail


def test_criterion_1_profile_constants():
    t0 = time.perf_counter()
    p = derive_constants(1.5, 0.2)
    worst = max(abs(getattr(p, k) / v - 1.0) for k, v in REFERENCE.items())
    rng = np.random.default_rng(2024)
    bad = 0
    for _ in range(1000):
        F = rng.uniform(0.05, 1.99)
        H_R = rng.uniform(0.0, 1.0) * critical_height(F)
        if H_R <= 0.0:
            continue
        q = derive_constants(F, H_R)
        assert q.case_tag is Case.SUBSHOCK
        if not (q.H_3 < q.H_R < q.H_s < q.H_star < 1.0):
            bad += 1
    elapsed = time.perf_counter() - t0
    _check(1, worst < 1e-12 and bad == 0 and elapsed < 1.0,
           f"max rel err {worst:.2e}, ordering violations {bad}/1000, {elapsed:.3f} s")


def test_criterion_2_critical_curve():
    H_C = critical_height(1.5)
    err = abs(H_C / (9.0 / (8.0 + 2.0 * math.sqrt(7.0))) - 1.0)
    flips = True
    for F in np.linspace(0.1, 1.95, 38):
        hc = critical_height(F)
        flips &= classify(F, math.nextafter(hc, 0.0)) is Case.SUBSHOCK
        flips &= classify(F, math.nextafter(hc, 1.0)) is Case.SMOOTH
        flips &= classify(F, hc) is Case.DEGENERATE
    _check(2, err < 1e-12 and flips, f"rel err {err:.2e}, classify flips across H_C: {flips}")


def test_criterion_3_simple_root_at_origin():
    pairs = random_subshock_pairs(10, seed=7)
    windings, rel = [], []
    for F, H_R in pairs:
        p = derive_constants(F, H_R)
        res = winding_details(determinant_for(p), circle_contour(0.0, 0.05, 32))
        windings.append(res.winding if res.ok else None)
        val, diag = evans_lopatinsky_details(0.0, p)
        rel.append(abs(val) / diag["column_scale"])
    ok = all(w == 1 for w in windings) and max(rel) < 1e-8
    _check(3, ok, f"windings {windings}, max |Delta(0)|/scale {max(rel):.1e}")


def _ratio_spread(f, mags, angles):
    vals = [f(m * complex(math.cos(a), math.sin(a))) / (m * complex(math.cos(a), math.sin(a)))
            for m in mags for a in angles]
    return max(abs(u / v - 1.0) for u in vals for v in vals)


def _smooth_spread(f, mags, angles):
    vals = [f(m * complex(math.cos(a), math.sin(a))) for m in mags for a in angles]
    return max(abs(u / v - 1.0) for u in vals for v in vals)


def test_criterion_4_high_frequency_limits():
    mags = (100.0, 150.0, 200.0)
    angles = (-0.5 * math.pi, -0.25 * math.pi, 0.0, 0.25 * math.pi, 0.5 * math.pi)
    sub = derive_constants(1.5, 0.2)
    smooth = derive_constants(1.5, 0.8)
    s1 = _ratio_spread(lambda z: evans_lopatinsky(z, sub), mags, angles)
    s2 = _smooth_spread(lambda z: evans_smooth(z, smooth), mags, angles)
    _check(4, s1 < 0.05 and s2 < 0.05,
           f"max pairwise deviation of Delta/lambda {s1:.4f}, of D {s2:.4f} (limit 0.05)")


def _acceptance_points():
    pts = []
    for F in (0.5, 1.0, 1.5):
        hc = critical_height(F)
        pts += [(F, round(hc * k / 6.0, 6)) for k in range(1, 6)]
        pts += [(F, round(hc + (1.0 - hc) * k / 6.0, 6)) for k in range(1, 6)]
    return pts


def test_criterion_5_scaled_down_sweep():
    p = derive_constants(1.5, 0.2)
    evans_lopatinsky(0.5, p)  # compile outside the timed region
    t0 = time.perf_counter()
    for lam in (0.5, 1j, -0.3 + 0.9j):
        evans_lopatinsky(lam, p)
    t_small = (time.perf_counter() - t0) / 3
    t0 = time.perf_counter()
    for lam in (100.0, 100j, 70.7 + 70.7j):
        evans_lopatinsky(lam, p)
    t_large = (time.perf_counter() - t0) / 3
    reports = [stability_verdict(F, H_R) for F, H_R in _acceptance_points()]
    bad = [(r.F, r.H_R, r.status, r.winding) for r in reports
           if not (r.status == STABLE and r.winding == 0 and r.residual < 0.05)]
    ok = not bad and len(reports) == 30 and t_small < 1.0 and t_large < 10.0
    _check(5, ok, f"{30 - len(bad)}/30 Stable with winding 0, max residual "
                  f"{max(r.residual for r in reports):.1e}; single determinant "
                  f"{1e3 * t_small:.1f} ms at |lambda|<=1, {1e3 * t_large:.1f} ms at |lambda|=100"
                  + (f"; failures {bad}" if bad else ""))


def test_criterion_6_full_domain_sweep():
    n_sub = len(SweepSpec(regime="subshock").grid())
    n_smooth = len(SweepSpec(regime="smooth").grid())
    detail = f"grid sizes {n_sub} subshock, {n_smooth} smooth"
    ok = n_sub == 1559 and n_smooth == 2227
    if os.environ.get("SVSTAB_FULL_SWEEP"):
        workers = int(os.environ.get("SVSTAB_WORKERS", os.cpu_count() or 1))
        summ = sweep(SweepSpec(workers=workers))
        unstable = summ.counts.get("Unstable", 0)
        ok = ok and unstable == 0
        detail += f"; full sweep counts {summ.counts}"
    else:
        detail += "; full sweep skipped (set SVSTAB_FULL_SWEEP=1 to run it)"
    _check(6, ok, detail)


def test_criterion_7_time_evolution():
    p = derive_constants(1.5, 0.2)
    cfg = SimConfig(t_end=2.5, cfl=0.9, perturbation=Perturbation("bump", 0.6, 0.4, 0.1),
                    snapshot_times=(0.625,), order=2)
    res = evolve_perturbed(p, Grid(-12.0, 12.0, 16000), cfg)
    d0, d_quarter, d_end = res.distances
    ratio = d_end / d0
    g, m = Grid(-1.0, 1.0, 64), ModelParams(1.5)
    drift = 0.0
    for h0 in (0.3, 1.0, 1.6):
        U = np.vstack([np.full(64, h0), np.full(64, h0**1.5)])
        V = U
        for _ in range(50):
            V = step(V, 0.3 * g.dx, g, m, cfl=0.9, order=2)
        drift = max(drift, float(np.max(np.abs(V - U))) / h0)
    ok = (ratio < 0.2 and d_end < d_quarter and res.mass_defect_max < 1e-12
          and drift <= 4 * np.finfo(float).eps and res.min_height > 0)
    _check(7, ok, f"distance ratio T/0 {ratio:.3f} (T/4 value {d_quarter:.4f} > {d_end:.4f}), "
                  f"mass defect {res.mass_defect_max:.1e}/step, equilibrium drift {drift:.1e}")


def test_criterion_8_property_suites():
    rng = np.random.default_rng(8)
    results = {}

    sym = 0.0
    diss = -np.inf
    for _ in range(200):
        s = State(rng.uniform(0.05, 3.0), rng.uniform(0.01, 3.0))
        m = ModelParams(rng.uniform(0.1, 1.99))
        A0 = symmetrizer_A0(s, m)
        S = A0 @ jacobian_A(s, rng.uniform(-2, 2), m)
        sym = max(sym, abs(S[0, 1] - S[1, 0]) / max(1.0, np.abs(S).max()))
        T = A0 @ relaxation_E(s)
        diss = max(diss, np.linalg.eigvalsh(0.5 * (T + T.T)).max())
    results["symmetrizer"] = sym < 1e-12 and diss <= 1e-12

    gam_err = 0.0
    for F, H_R in ((1.5, 0.2), (1.5, 0.8)):
        p = derive_constants(F, H_R)
        for lam in rng.uniform(-3, 3, 100) + 1j * rng.uniform(-50, 50, 100):
            for side, fn in (("-", gamma_minus), ("+", gamma_plus)):
                A, E = endstate_matrices(p, side)
                direct = np.sort_complex(np.linalg.eigvals(np.linalg.solve(A, E - lam * np.eye(2))))
                closed = np.sort_complex(np.array(fn(lam, p)))
                gam_err = max(gam_err, np.abs(closed - direct).max() / max(1, np.abs(direct).max()))
    results["gamma closed forms"] = gam_err < 1e-10

    conj = 0.0
    for f in (determinant_for(derive_constants(1.5, 0.2)), determinant_for(derive_constants(1.5, 0.8))):
        for lam in rng.uniform(0, 20, 10) + 1j * rng.uniform(0.1, 60, 10):
            a, b = f(lam), f(lam.conjugate())
            conj = max(conj, abs(a - b.conjugate()) / abs(a))
    results["conjugate symmetry"] = conj < 1e-9

    refine = all(
        stability_verdict(F, H_R, n_nodes=128).winding == stability_verdict(F, H_R, n_nodes=256).winding
        for F, H_R in _acceptance_points()[::6])
    results["refinement invariance"] = refine

    planted = True
    for F, H_R in ((1.5, 0.2), (1.5, 0.8)):
        det = determinant_for(derive_constants(F, H_R))
        c = build_contour(0.1, 5.0, 1e-6 if H_R < critical_height(F) else 0.0, 32)
        base = winding_details(det, c)
        plus = winding_details(lambda z: det(z) * (z - (1.0 + 2.0j)), c)
        planted &= base.ok and plus.ok and plus.winding == base.winding + 1
    results["planted zero"] = planted

    pts = ((1.0, 0.3), (1.5, 0.2), (1.5, 0.8))
    outs = [format_rows(sweep(SweepSpec(points=pts, workers=w, n_nodes=128)).rows) for w in (1, 2)]
    results["sweep determinism"] = outs[0] == outs[1]

    failed = [k for k, v in results.items() if not v]
    _check(8, not failed, "all property suites hold" if not failed else f"failed: {failed}")
