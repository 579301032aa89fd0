"""Hybrid series/ODE computation of the Evans-Lopatinsky determinant and the smooth Evans function.

Both end equilibria are regular singular points of the eigenvalue ODE written
in the height variable ``H``.  Near the end state the decaying mode is a
convergent power series in ``H - center``; away from it the series value is
handed to an adaptive integrator.

Mode scaling
    The seed vector is ``(1, c - lambda/gamma)``, which is analytic in
    ``lambda`` and bounded as ``|lambda| -> inf``.  During continuation the
    mode is additionally multiplied by ``exp(-lambda * phi(H))`` where ``phi``
    integrates the high-frequency part of the growth rate.  This factor is
    entire and nonvanishing, so zeros and winding numbers are unchanged, but
    the determinant stays O(|lambda|) instead of growing exponentially.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from . import _kernels as K
from .errors import DomainError, IntegrationError, ResonanceError, SingularPointError
from .frequency import gamma_minus, gamma_plus
from .model import ModelParams, State, jacobian_A, relaxation_E
from .profile import Case, ProfileParams, profile_rhs


@dataclass(frozen=True)
class EvansConfig:
    order_N: int = 60
    delta_match: float = 0.05
    ode_rel_tol: float = 1e-10
    smooth_Hl: float | None = None
    smooth_Hr: float | None = None
    series_tol: float = 1e-10
    max_cancellation: float = 1e4
    min_delta: float = 1e-6
    max_steps: int = 200_000
    normalize: bool = True


@dataclass(frozen=True)
class ModeVector:
    value: np.ndarray
    at_H: float
    lam: complex


@dataclass(frozen=True)
class SeriesExpansion:
    center: float
    coeffs: np.ndarray
    order_N: int
    radius: float = field(default=np.inf)

    def __call__(self, H) -> np.ndarray:
        s = H - self.center
        acc = np.zeros(2, dtype=complex)
        for cn in self.coeffs[::-1]:
            acc = acc * s + cn
        return acc

    def tail(self, H) -> float:
        """Size of the last two retained terms at ``H``."""
        d = abs(H - self.center)
        N = self.order_N
        if N == 0:
            return 0.0
        last = np.abs(self.coeffs[-2:]).max(axis=1)
        return float(max(last[-1] * d**N, last[0] * d ** (N - 1)))

    def largest_term(self, H) -> float:
        d = abs(H - self.center)
        mags = np.abs(self.coeffs).max(axis=1)
        with np.errstate(over="ignore"):
            return float(np.max(mags * d ** np.arange(self.order_N + 1)))


# ---------------------------------------------------------------------------
# evolution matrix


def _AH(H, p):
    Q = p.c * H - p.q0
    return np.array([[0.0, 0.0],
                     [1.0 / p.F**2 - 2.0 * p.c * Q / H**2 + 2.0 * Q**2 / H**3,
                      2.0 * p.q0 / H**2]])


def evolution_matrix(lam: complex, H: float, p: ProfileParams, gamma_shift: complex) -> np.ndarray:
    """Right-hand side of ``dw/dH = M w`` for ``w = exp(-gamma x) W``."""
    if H == 1.0 or H == p.H_R:
        raise SingularPointError(f"H = {H} is an end state; use the series expansion")
    Hp = profile_rhs(H, p)
    s = State(H, p.c * H - p.q0)
    A = jacobian_A(s, p.c, ModelParams(p.F))
    E = relaxation_E(s)
    Ainv = np.linalg.inv(A)
    I = np.eye(2)
    return (Ainv @ (E - lam * I) - gamma_shift * I) / Hp - Ainv @ _AH(H, p)


# ---------------------------------------------------------------------------
# series


def _poly_matrices(p: ProfileParams):
    """Numerator pieces and denominator of ``M = N(H) / (F^2 H^3 C(H) S(H))``."""
    F2 = p.F**2
    c, q0 = p.c, p.q0
    H = Polynomial([0.0, 1.0])
    Q = c * H - q0
    S = H**3 - p.H_s**3
    P = [[H * (c * H - 2.0 * q0), -H**2],
         [-(H**3 - F2 * Q**2) / F2, -c * H**2]]
    G0 = [[Polynomial([0.0]), Polynomial([0.0])], [2.0 * Q**2 + H**3, -2.0 * Q * H]]
    Kh = [[Polynomial([0.0]), Polynomial([0.0])],
          [(H**3 - 2.0 * F2 * c * Q * H + 2.0 * F2 * Q**2) / F2, 2.0 * q0 * H]]

    def mul(X, Y):
        return [[X[i][0] * Y[0][j] + X[i][1] * Y[1][j] for j in range(2)] for i in range(2)]

    C = (H - 1.0) * (H - p.H_R) * (H - p.H_3)
    PG = mul(P, G0)
    PK = mul(P, Kh)
    N0 = [[-F2 * S * PG[i][j] + F2**2 * C * PK[i][j] for j in range(2)] for i in range(2)]
    Nl = [[F2 * S * H**3 * P[i][j] for j in range(2)] for i in range(2)]
    Ng = [[-(H**3) * S**2 * (1.0 if i == j else 0.0) for j in range(2)] for i in range(2)]
    return N0, Nl, Ng, H, S


@functools.lru_cache(maxsize=64)
def _series_data(p: ProfileParams, center: float):
    N0, Nl, Ng, H, S = _poly_matrices(p)
    others = [r for r in (1.0, p.H_R, p.H_3) if r != center]
    Ct = (H - others[0]) * (H - others[1])
    d = p.F**2 * H**3 * Ct * S
    shift = Polynomial([center, 1.0])

    def shifted(poly):
        return poly(shift).coef

    deg = 0
    mats = []
    for X in (N0, Nl, Ng):
        entries = [[shifted(X[i][j]) for j in range(2)] for i in range(2)]
        deg = max(deg, max(len(e) for row in entries for e in row) - 1)
        mats.append(entries)
    dco = shifted(d)
    deg = max(deg, len(dco) - 1)
    out = []
    for entries in mats:
        arr = np.zeros((deg + 1, 2, 2))
        for i in range(2):
            for j in range(2):
                e = entries[i][j]
                arr[: len(e), i, j] = e
        out.append(arr)
    dpad = np.zeros(deg + 1)
    dpad[: len(dco)] = dco
    sing = [0.0, p.H_R, p.H_3, 1.0]
    sing += list(p.H_s * np.exp(2j * np.pi * np.arange(3) / 3))
    radius = min(abs(z - center) for z in sing if abs(z - center) > 1e-14)
    return out[0], out[1], out[2], dpad, float(radius)


def _seed(lam, gam, p, N0, Nl, Ng):
    if abs(gam) > 1e-300:
        return np.array([1.0 + 0j, p.c - lam / gam])
    # kernel of the indicial matrix
    M = N0[0] + lam * Nl[0] + gam * Ng[0]
    v = np.array([M[0, 1], -M[0, 0]], dtype=complex)
    if np.abs(v).max() < 1e-300:
        v = np.array([M[1, 1], -M[1, 0]], dtype=complex)
    return v / np.abs(v).max()


def series_seed_and_recurse(lam: complex, p: ProfileParams, center: float,
                            gamma_shift: complex, N: int) -> SeriesExpansion:
    if center not in (1.0, p.H_R):
        raise DomainError("series centers are the end states 1 and H_R")
    N0, Nl, Ng, dco, radius = _series_data(p, center)
    lam = complex(lam)
    gam = complex(gamma_shift)
    c0 = _seed(lam, gam, p, N0, Nl, Ng)
    M0 = N0[0] + lam * Nl[0] + gam * Ng[0]
    resid = np.abs(M0 @ c0).max()
    if resid > 1e-8 * max(np.abs(M0).max(), 1.0) * np.abs(c0).max():
        raise DomainError("gamma_shift is not the exponent of an analytic mode at this center")
    coeffs, bad = K.series_coefficients(N0, Nl, Ng, dco, lam, gam, c0, int(N))
    if bad >= 0:
        raise ResonanceError(f"indicial resonance at order {bad}", order=int(bad))
    return SeriesExpansion(center=center, coeffs=coeffs, order_N=int(N), radius=radius)


def _choose_handoff(series: SeriesExpansion, direction: float, delta_max: float,
                    cfg: EvansConfig):
    """Largest offset (shrinking geometrically) where the truncated series is trustworthy."""
    delta = delta_max
    while delta >= cfg.min_delta:
        H = series.center + direction * delta
        val = series(H)
        size = np.abs(val).max()
        if (np.isfinite(size) and size > 0
                and series.tail(H) <= cfg.series_tol * size
                and series.largest_term(H) <= cfg.max_cancellation * size):
            return H, val
        delta *= 0.7
    raise IntegrationError(
        "series cannot be evaluated far enough from the end state",
        {"center": series.center, "order": series.order_N, "min_delta": cfg.min_delta},
    )


# ---------------------------------------------------------------------------
# continuation


def _mu(H, p, sign):
    sr = np.sqrt(p.H_R) + 1.0
    return p.F * H * sr / (p.F * p.H_R + sign * H**1.5 * sr)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _phase(H_from, H_to, p, sign):
    """``int_{H_from}^{H_to} (mu(s) - mu(H_from)) / H'(s) ds``; the integrand is regular at end states."""
    if H_to == H_from:
        return 0.0
    mid, half = 0.5 * (H_to + H_from), 0.5 * (H_to - H_from)
    s = mid + half * _GL_X
    f = (_mu(s, p, sign) - _mu(H_from, p, sign)) / profile_rhs(s, p)
    return float(half * np.dot(_GL_W, f))


def _kernel_params(p: ProfileParams, sign: float, mu_ref: float, wkb: bool):
    return np.array([p.F, p.H_R, p.c, p.q0, p.H_3, p.H_s, sign, mu_ref, 1.0 if wkb else 0.0])


def _nearest_singular(H, p):
    cands = {"H_s": p.H_s, "H_R": p.H_R, "1": 1.0, "H_3": p.H_3}
    name = min(cands, key=lambda k: abs(cands[k] - H))
    return name, cands[name]


def _integrate(y0, H0, H1, p, lam, gam, cfg, prm):
    scale = float(np.abs(y0).max())
    y, status, acc, rej, reached = K.integrate_mode(
        float(H0), float(H1), np.asarray(y0, dtype=np.complex128), prm, complex(lam),
        complex(gam), cfg.ode_rel_tol, cfg.ode_rel_tol * 1e-6 * scale, cfg.max_steps)
    if status != K.OK:
        name, val = _nearest_singular(reached, p)
        reason = {K.MAX_STEPS: "step budget exhausted", K.STEP_COLLAPSE: "step size collapse",
                  K.NONFINITE: "non-finite solution"}[status]
        raise IntegrationError(reason, {"H_reached": float(reached), "nearest_singular": name,
                                        "nearest_singular_H": val, "steps": int(acc + rej)})
    return y, int(acc), int(rej)


def evolve_mode(mode: ModeVector, to_H: float, p: ProfileParams, gamma_shift: complex,
                cfg: EvansConfig = EvansConfig()) -> ModeVector:
    """Continue a mode of ``dw/dH = M w`` (no rescaling) between interior heights."""
    lo, hi = p.H_R, 1.0
    for H in (mode.at_H, to_H):
        if not lo < H < hi:
            raise DomainError(f"height {H} is outside ({lo}, {hi})")
    prm = _kernel_params(p, 1.0, 0.0, False)
    y, _, _ = _integrate(mode.value, mode.at_H, to_H, p, mode.lam, gamma_shift, cfg, prm)
    return ModeVector(value=y, at_H=float(to_H), lam=mode.lam)


def _continued_mode(lam, p, cfg, center, gam, target_H, delta_cap):
    """Series-seeded mode at ``center`` continued to ``target_H`` (rescaled if configured)."""
    sign = 1.0 if center == 1.0 else -1.0
    series = series_seed_and_recurse(lam, p, center, gam, cfg.order_N)
    direction = 1.0 if target_H > center else -1.0
    delta_max = min(cfg.delta_match, 0.5 * series.radius, delta_cap, abs(target_H - center))
    H_hand, w = _choose_handoff(series, direction, delta_max, cfg)
    mu_ref = float(_mu(center, p, sign))
    if cfg.normalize:
        w = w * np.exp(-lam * _phase(center, H_hand, p, sign))
    prm = _kernel_params(p, sign, mu_ref, cfg.normalize)
    y, acc, rej = _integrate(w, H_hand, target_H, p, lam, gam, cfg, prm)
    diag = {"order_N": cfg.order_N, "H_handoff": float(H_hand), "ode_steps": acc,
            "ode_rejected": rej, "series_radius": series.radius}
    return y, diag


def _require(p, case):
    if p.case_tag is not case:
        raise DomainError(f"expected a {case.value} profile, got {p.case_tag.value}")


def evans_lopatinsky_details(lam: complex, p: ProfileParams, cfg: EvansConfig = EvansConfig()):
    """Return ``(Delta, diagnostics)`` for a subshock profile."""
    _require(p, Case.SUBSHOCK)
    lam = complex(lam)
    Hs = p.H_star
    g1m, _ = gamma_minus(lam, p)
    y, d = _continued_mode(lam, p, cfg, 1.0, g1m, Hs, 0.9 * (1.0 - Hs))
    diag = {"order_N": d["order_N"], "H_minus": d["H_handoff"], "ode_steps": d["ode_steps"],
            "ode_rejected": d["ode_rejected"]}
    s = State(Hs, p.Q_star)
    col2 = jacobian_A(s, p.c, ModelParams(p.F)) @ y
    R_star = Hs - p.Q_star**2 / Hs**2
    col1 = np.array([lam * (p.H_R - Hs), lam * (p.Q_R - p.Q_star) + R_star])
    val = complex(col1[0] * col2[1] - col1[1] * col2[0])
    diag["column_scale"] = float(np.linalg.norm(col1) * np.linalg.norm(col2))
    return val, diag


def evans_lopatinsky(lam: complex, p: ProfileParams, cfg: EvansConfig = EvansConfig()) -> complex:
    return evans_lopatinsky_details(lam, p, cfg)[0]


def smooth_heights(p: ProfileParams, cfg: EvansConfig = EvansConfig()):
    """Evaluation height ``H_r`` (fixed for all ``lambda``) and the optional fixed ``H_l``."""
    gap = 1.0 - p.H_R
    Hr = cfg.smooth_Hr
    if Hr is None:
        radius = _series_data(p, p.H_R)[4]
        Hr = p.H_R + min(cfg.delta_match, 0.3 * radius, 0.25 * gap)
    Hl = cfg.smooth_Hl
    upper = 1.0 if Hl is None else Hl
    if not (p.H_R < Hr < upper and upper <= 1.0 and (Hl is None or Hl < 1.0)):
        raise DomainError("need H_R < smooth_Hr < smooth_Hl < 1")
    return Hl, Hr


def evans_smooth_details(lam: complex, p: ProfileParams, cfg: EvansConfig = EvansConfig()):
    """Return ``(D, diagnostics)`` for a smooth profile, evaluated at a ``lambda``-independent ``H_r``."""
    _require(p, Case.SMOOTH)
    lam = complex(lam)
    Hl, Hr = smooth_heights(p, cfg)
    g1m, _ = gamma_minus(lam, p)
    _, g2p = gamma_plus(lam, p)
    y2, d2 = _continued_mode(lam, p, cfg, p.H_R, g2p, Hr, np.inf)
    if Hl is None:
        y1, d1 = _continued_mode(lam, p, cfg, 1.0, g1m, Hr, 0.5 * (1.0 - Hr))
    else:
        minus = series_seed_and_recurse(lam, p, 1.0, g1m, cfg.order_N)
        w1 = minus(Hl)
        if minus.tail(Hl) > cfg.series_tol * np.abs(w1).max():
            raise IntegrationError("minus-mode series tail too large at smooth_Hl",
                                   {"smooth_Hl": Hl, "tail": minus.tail(Hl)})
        if cfg.normalize:
            w1 = w1 * np.exp(-lam * _phase(1.0, Hl, p, 1.0))
        prm = _kernel_params(p, 1.0, float(_mu(1.0, p, 1.0)), cfg.normalize)
        y1, acc, rej = _integrate(w1, Hl, Hr, p, lam, g1m, cfg, prm)
        d1 = {"H_handoff": float(Hl), "ode_steps": acc, "ode_rejected": rej}
    val = complex(y1[0] * y2[1] - y1[1] * y2[0])
    diag = {"order_N": cfg.order_N, "H_minus": d1["H_handoff"], "H_r": float(Hr),
            "H_plus": d2["H_handoff"], "ode_steps": d1["ode_steps"] + d2["ode_steps"],
            "ode_rejected": d1["ode_rejected"] + d2["ode_rejected"],
            "column_scale": float(np.linalg.norm(y1) * np.linalg.norm(y2))}
    return val, diag


def evans_smooth(lam: complex, p: ProfileParams, cfg: EvansConfig = EvansConfig()) -> complex:
    return evans_smooth_details(lam, p, cfg)[0]


def determinant_for(p: ProfileParams, cfg: EvansConfig = EvansConfig()):
    """The determinant appropriate for the profile type, as a function of ``lambda``."""
    if p.case_tag is Case.SUBSHOCK:
        return functools.partial(evans_lopatinsky, p=p, cfg=cfg)
    if p.case_tag is Case.SMOOTH:
        return functools.partial(evans_smooth, p=p, cfg=cfg)
    raise DomainError(f"no determinant for case {p.case_tag.value}")
