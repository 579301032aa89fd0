import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from svstab.errors import CFLError, DomainError
from svstab.fv import (
    Grid,
    Perturbation,
    SimConfig,
    _steep_fronts,
    evolve_perturbed,
    exact_source,
    initial_data,
    numerical_flux,
    step,
)
from svstab.model import ModelParams, State, flux
from svstab.profile import critical_height, derive_constants


def exact_riemann_interface_flux(hl, ul, hr, ur, g):
    """Exact shallow-water Riemann solution sampled at x/t = 0 (independent oracle)."""
    cl, cr = math.sqrt(g * hl), math.sqrt(g * hr)

    def wave(h, hk):
        if h > hk:
            return (h - hk) * math.sqrt(0.5 * g * (h + hk) / (h * hk))
        return 2.0 * (math.sqrt(g * h) - math.sqrt(g * hk))

    hs = brentq(lambda h: wave(h, hl) + wave(h, hr) + ur - ul, 1e-12, 10.0 * max(hl, hr))
    us = 0.5 * (ul + ur) + 0.5 * (wave(hs, hr) - wave(hs, hl))
    cs = math.sqrt(g * hs)
    if us >= 0:  # sample left of the contact
        if hs > hl:
            s = ul - cl * math.sqrt(0.5 * hs * (hs + hl)) / hl
            h, u = (hl, ul) if s >= 0 else (hs, us)
        elif ul - cl >= 0:
            h, u = hl, ul
        elif us - cs <= 0:
            h, u = hs, us
        else:
            u = (ul + 2.0 * cl) / 3.0
            h = u * u / g
    else:
        if hs > hr:
            s = ur + cr * math.sqrt(0.5 * hs * (hs + hr)) / hr
            h, u = (hr, ur) if s <= 0 else (hs, us)
        elif ur + cr <= 0:
            h, u = hr, ur
        elif us + cs >= 0:
            h, u = hs, us
        else:
            u = (ur - 2.0 * cr) / 3.0
            h = u * u / g
    return (h * u, h * u * u + 0.5 * g * h * h), hs, us


def test_riemann_oracle_frozen_values():
    for F, ref in ((1.0, (0.214302, 0.327384)), (1.5, (0.142868, 0.145504))):
        (m1, m2), hs, _ = exact_riemann_interface_flux(1.0, 0.0, 0.5, 0.0, 1.0 / F**2)
        assert (m1, m2) == pytest.approx(ref, abs=2e-6)
        assert hs == pytest.approx(0.72692, abs=1e-5)


@pytest.mark.parametrize("F", [0.5, 1.0, 1.5])
def test_dam_break_flux_against_exact_solution(F):
    m = ModelParams(F)
    f1, f2 = numerical_flux(State(1.0, 0.0), State(0.5, 0.0), m)
    (e1, e2), _, _ = exact_riemann_interface_flux(1.0, 0.0, 0.5, 0.0, 1.0 / F**2)
    assert f1 > 0 and e1 > 0
    assert f1 == pytest.approx(e1, rel=0.2)
    assert f2 == pytest.approx(e2, rel=0.1)


@given(h=st.floats(0.05, 3.0), q=st.floats(-3.0, 3.0), F=st.floats(0.2, 3.0))
def test_flux_consistency(h, q, F):
    s, m = State(h, q), ModelParams(F)
    assert numerical_flux(s, s, m) == pytest.approx(flux(s, m), rel=1e-13, abs=1e-13)


def test_supersonic_data_is_upwinded():
    m = ModelParams(1.0)
    right_moving = (State(1.0, 3.0), State(0.8, 2.5))
    assert numerical_flux(*right_moving, m) == pytest.approx(flux(right_moving[0], m))
    left_moving = (State(1.0, -3.0), State(0.8, -2.5))
    assert numerical_flux(*left_moving, m) == pytest.approx(flux(left_moving[1], m))


def test_vacuum_rejected():
    with pytest.raises(DomainError):
        numerical_flux(State(0.0, 0.0), State(1.0, 0.0), ModelParams(1.0))
    with pytest.raises(DomainError):
        step([State(1.0, 1.0), State(-0.1, 0.0)], 1e-4, Grid(0, 1, 2), ModelParams(1.0))


@given(h=st.floats(0.1, 2.0), q=st.floats(-1.5, 2.5), dt=st.floats(1e-4, 2.0))
def test_exact_source_matches_ode_solver(h, q, dt):
    sol = solve_ivp(lambda t, y: [h - abs(y[0]) * y[0] / h**2], (0.0, dt), [q],
                    rtol=1e-11, atol=1e-13)
    got = float(exact_source(np.array([h]), np.array([q]), dt)[0])
    assert got == pytest.approx(sol.y[0, -1], rel=1e-7, abs=1e-9)


@pytest.mark.parametrize("order", [1, 2])
@pytest.mark.parametrize("h0", [0.2, 1.0, 1.7])
def test_constant_equilibrium_is_fixed(order, h0):
    g, m = Grid(-1.0, 1.0, 50), ModelParams(1.5)
    U = np.vstack([np.full(50, h0), np.full(50, h0**1.5)])
    dt = 0.5 * g.dx / (1.0 + 2.0 * math.sqrt(h0))
    V = U
    for _ in range(20):
        V = step(V, dt, g, m, cfl=0.9, order=order)
    assert np.max(np.abs(V - U)) <= 4 * np.finfo(float).eps * h0


def test_step_accepts_state_lists():
    g, m = Grid(0.0, 1.0, 3), ModelParams(1.0)
    out = step([State(1.0, 1.0)] * 3, 0.01, g, m)
    assert all(isinstance(s, State) for s in out)
    assert out[0].h == pytest.approx(1.0, abs=1e-15)


def test_cfl_violation_raises_before_stepping():
    g, m = Grid(0.0, 1.0, 10), ModelParams(1.0)
    U = np.vstack([np.ones(10), np.ones(10)])
    with pytest.raises(CFLError):
        step(U, 1.0, g, m, cfl=0.9)
    with pytest.raises(DomainError):
        step(U[:, :5], 0.001, g, m)


def test_mass_balance_per_step_and_positivity(sub_params):
    res = evolve_perturbed(sub_params, Grid(-12.0, 12.0, 1200),
                           SimConfig(t_end=0.5, perturbation=Perturbation("bump", 0.6, 0.4, 0.1),
                                     order=2))
    assert res.mass_defect_max < 1e-12
    assert res.min_height > 0
    d = res.diagnostics()
    assert set(d) >= {"times", "best_translate_distance", "shock_position", "mass_defect_max"}


def test_unperturbed_smooth_profile_first_order_self_convergence(smooth_params):
    errs = []
    for n in (400, 800, 1600):
        res = evolve_perturbed(smooth_params, Grid(-20.0, 20.0, n), SimConfig(t_end=1.0))
        errs.append(res.distances[-1])
    assert errs[0] / errs[1] > 1.7 and errs[1] / errs[2] > 1.7
    assert errs[-1] < 1e-3


def test_subshock_position_moves_with_wave_speed(sub_params):
    res = evolve_perturbed(sub_params, Grid(-8.0, 8.0, 1600),
                           SimConfig(t_end=1.0, snapshot_times=(0.5,)))
    assert res.times == [0.0, 0.5, 1.0]
    for t, x in zip(res.times, res.shock_positions):
        assert x == pytest.approx(sub_params.c * t, abs=0.05)


def test_perturbation_shapes():
    x = np.linspace(-3, 3, 601)
    b = Perturbation("bump", 0.0, 1.0, 0.2).profile(x)
    assert b.max() == pytest.approx(0.2)
    assert np.all(b[np.abs(x) >= 1.0] == 0.0)
    with pytest.raises(DomainError):
        Perturbation("spike")
    with pytest.raises(DomainError):
        Perturbation(width=0.0)
    with pytest.raises(DomainError):
        SimConfig(t_end=1.0, cfl=1.0)
    with pytest.raises(DomainError):
        SimConfig(t_end=1.0, order=3)


def test_shock_supported_perturbation_breaks_jump_condition(sub_params):
    g = Grid(-2.0, 2.0, 400)
    pert = Perturbation("shock-supported", 0.0, 0.5, 0.1)
    h, q = initial_data(sub_params, g, pert)
    h0, _ = initial_data(sub_params, g, None)
    x = g.centers
    assert np.all(h[x >= 0] == h0[x >= 0])
    assert np.any(h[x < 0] != h0[x < 0])
    # the jump at the subshock is no longer the admissible one
    assert h[np.searchsorted(x, 0.0) - 1] > sub_params.H_star


def test_steep_front_counter():
    x = np.linspace(0.0, 10.0, 1001)
    one = np.where(x < 5, 1.0, 0.5)
    two = one + np.where(x < 2, 0.2, 0.0)
    dx = x[1] - x[0]
    assert _steep_fronts(one, dx) == 1
    assert _steep_fronts(two, dx) == 2
    assert _steep_fronts(np.ones(20), dx) == 0


def test_rejects_untreated_cases():
    with pytest.raises(DomainError):
        evolve_perturbed(derive_constants(1.5, critical_height(1.5)), Grid(-1, 1, 10),
                         SimConfig(t_end=0.1))


def test_shock_supported_perturbation_emits_secondary_front(sub_params):
    g = Grid(-4.0, 4.0, 4000)
    runs = {}
    for name, pert in (("plain", None), ("kicked", Perturbation("shock-supported", 0.0, 0.5, 0.2))):
        runs[name] = evolve_perturbed(sub_params, g, SimConfig(t_end=0.3, perturbation=pert,
                                                               order=2, snapshot_times=(0.2,)))
    for t in (0.2, 0.3):
        assert runs["plain"].front_counts[t] == 1
        assert runs["kicked"].front_counts[t] == 2
    # the extra front lags well behind the subshock
    x, h, _ = runs["kicked"].snapshots[0.3]
    grad = np.abs(np.diff(h))
    main = int(np.argmax(grad))
    behind = grad[: main - 20]
    assert x[int(np.argmax(behind))] < x[main] - 0.15


def test_smooth_perturbation_converges_to_shift(smooth_params):
    res = evolve_perturbed(smooth_params, Grid(-40.0, 40.0, 2000),
                           SimConfig(t_end=12.0, perturbation=Perturbation("bump", 0.0, 2.0, 0.05),
                                     snapshot_times=(3.0,), order=2))
    d0, d_quarter, d_end = res.distances
    assert d_end < d_quarter and d_end < 0.7 * d0
    assert res.mass_defect_max < 1e-12
