"""Spectral-parameter utilities.

The limiting coefficient matrices ``A^{-1}(E - lambda I)`` at ``x = -inf``
(``H = 1``) and ``x = +inf`` (``H = H_R``) have eigenvalues in closed form.
Labels follow the explicit sign in front of the principal square root, so
``g2m(0) = 0`` and ``g1p(0) = 0``; the root that suffers cancellation is
recovered from the product of the roots.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BranchCollisionError, DomainError
from .model import ModelParams, State, jacobian_A, relaxation_E
from .profile import Case, ProfileParams, profile_rhs


@dataclass(frozen=True)
class SpatialEigenvalues:
    g1m: complex
    g2m: complex
    g1p: complex
    g2p: complex


def _roots(pref, b, disc, prod_num):
    """``pref*(b +/- sqrt(disc))`` without cancellation; ``prod_num = b^2 - disc``."""
    d = np.sqrt(disc + 0j)
    if np.any(d == 0):
        raise BranchCollisionError("spatial eigenvalues collide (zero discriminant)")
    bp, bm = b + d, b - d
    plus_big = np.abs(bp) >= np.abs(bm)
    safe_bp = np.where(plus_big, bp, 1.0)
    safe_bm = np.where(plus_big, 1.0, bm)
    r1 = np.where(plus_big, pref * bp, pref * prod_num / safe_bm)
    r2 = np.where(plus_big, pref * prod_num / safe_bp, pref * bm)
    if np.ndim(r1) == 0:
        return complex(r1), complex(r2)
    return r1, r2


def gamma_minus(lam, p: ProfileParams):
    """Eigenvalues ``(g1m, g2m)`` at ``x = -inf``."""
    lam = np.asarray(lam, dtype=complex)
    F, nu = p.F, p.nu
    D = nu**2 * (nu + 1.0) ** 2 - F**2
    if D == 0:
        raise DomainError("degenerate denominator in gamma_minus")
    pref = F * nu * (nu + 1.0) / (2.0 * D)
    b = F * (nu**2 + nu - 2.0) - 2.0 * F * lam
    disc = (F**2 * (nu**2 + nu - 2.0) ** 2
            + 4.0 * lam * nu * (nu + 1.0) * (2.0 * nu**2 + 2.0 * nu - F**2)
            + 4.0 * lam**2 * nu**2 * (nu + 1.0) ** 2)
    return _roots(pref, b, disc, -4.0 * lam * (lam + 2.0) * D)


def gamma_plus(lam, p: ProfileParams):
    """Eigenvalues ``(g1p, g2p)`` at ``x = +inf``."""
    lam = np.asarray(lam, dtype=complex)
    F, nu = p.F, p.nu
    D = (nu + 1.0) ** 2 - F**2 * nu**4
    if D == 0:
        raise DomainError("degenerate denominator in gamma_plus")
    pref = F * nu * (nu + 1.0) / (2.0 * D)
    m = 1.0 + nu - 2.0 * nu**2
    b = F * nu * m - 2.0 * F * lam * nu**2
    disc = (F**2 * nu**2 * m**2
            + 4.0 * lam * nu * (nu + 1.0) * (2.0 * nu + 2.0 - F**2 * nu**2)
            + 4.0 * lam**2 * (nu + 1.0) ** 2)
    return _roots(pref, b, disc, -4.0 * lam * (lam + 2.0 * nu) * D)


def spatial_eigenvalues(lam: complex, p: ProfileParams) -> SpatialEigenvalues:
    g1m, g2m = gamma_minus(lam, p)
    g1p, g2p = gamma_plus(lam, p)
    return SpatialEigenvalues(g1m, g2m, g1p, g2p)


def consistent_splitting(lam: complex, p: ProfileParams) -> bool:
    try:
        g = spatial_eigenvalues(lam, p)
    except BranchCollisionError:
        return False
    minus_ok = g.g1m.real > 0 and g.g2m.real < 0
    if p.case_tag is Case.SMOOTH:
        return bool(minus_ok and g.g1p.real > 0 and g.g2p.real < 0)
    return bool(minus_ok and g.g1p.real > 0 and g.g2p.real > 0)


def endstate_matrices(p: ProfileParams, side: str):
    """``(A, E)`` at the left (``'-'``) or right (``'+'``) equilibrium."""
    H = 1.0 if side == "-" else p.H_R
    s = State(H, p.c * H - p.q0)
    return jacobian_A(s, p.c, ModelParams(p.F)), relaxation_E(s)


def splitting_boundary(p: ProfileParams, kappa_max: float = 20.0, n: int = 801):
    """Curves where some spatial eigenvalue is purely imaginary.

    ``gamma = i kappa`` solves ``det(E - lambda I - i kappa A) = 0``, so each
    endstate contributes the two eigenvalue branches of ``E - i kappa A``.
    Returns a list of ``(re, im, branch)`` rows.
    """
    rows = []
    kappa = np.linspace(-kappa_max, kappa_max, n)
    for side, tag in (("-", "minus"), ("+", "plus")):
        A, E = endstate_matrices(p, side)
        for k in kappa:
            Mk = E - 1j * k * A
            tr = Mk[0, 0] + Mk[1, 1]
            det = Mk[0, 0] * Mk[1, 1] - Mk[0, 1] * Mk[1, 0]
            sq = np.sqrt(tr * tr - 4.0 * det + 0j)
            for lab, val in (("a", 0.5 * (tr + sq)), ("b", 0.5 * (tr - sq))):
                rows.append((float(val.real), float(val.imag), f"{tag}-{lab}"))
    return rows


# ---------------------------------------------------------------------------
# high-frequency radius


def _mu(H, p):
    """Eigenvalues ``(mu1, mu2)`` of ``-A^{-1}`` along the profile."""
    sr = np.sqrt(p.H_R) + 1.0
    num = p.F * H * sr
    return num / (p.F * p.H_R + H**1.5 * sr), num / (p.F * p.H_R - H**1.5 * sr)


def _R(H, p):
    sr = np.sqrt(p.H_R)
    F = p.F
    t = F * (H - p.H_R) / (sr + 1.0)
    return np.array([[-F * H, F * H],
                     [H**1.5 - F * H * sr - t, H**1.5 + F * H * sr + t]])


def _diag_coefficients(H, p, fd=1e-6):
    """Return ``(mu, M, T, dT/dx)`` of the first and second diagonalizations at ``H``."""
    mp = ModelParams(p.F)

    def at(Hv):
        Q = p.c * Hv - p.q0
        s = State(Hv, Q)
        A = jacobian_A(s, p.c, mp)
        E = relaxation_E(s)
        AH = np.array([[0.0, 0.0],
                       [1.0 / p.F**2 - 2.0 * p.c * Q / Hv**2 + 2.0 * Q**2 / Hv**3,
                        2.0 * p.q0 / Hv**2]])
        Hp = profile_rhs(Hv, p)
        Ainv = np.linalg.inv(A)
        R = _R(Hv, p)
        RH = (_R(Hv + fd, p) - _R(Hv - fd, p)) / (2.0 * fd)
        Rinv = np.linalg.inv(R)
        M = Rinv @ (Ainv @ E - Ainv @ AH * Hp) @ R - Rinv @ RH * Hp
        mu = np.array(_mu(Hv, p))
        T = np.zeros((2, 2))
        T[0, 1] = M[0, 1] / (mu[1] - mu[0])
        T[1, 0] = M[1, 0] / (mu[0] - mu[1])
        return mu, M, T, Hp

    mu, M, T, Hp = at(H)
    _, _, Tp, _ = at(H + fd)
    _, _, Tm, _ = at(H - fd)
    Tx = (Tp - Tm) / (2.0 * fd) * Hp
    return mu, M, T, Tx


def _effective_gap(xs, g):
    """``1 / sup_x int_{-inf}^x exp(int_y^x g) dy`` for samples of ``g`` on ascending ``xs``.

    Solves ``K' = g K + 1`` from the left tail, where ``g`` tends to a negative limit.
    """
    if g[0] >= 0:
        return -np.inf
    K = -1.0 / g[0]
    K_max = K
    for i in range(len(xs) - 1):
        dx = xs[i + 1] - xs[i]
        gm = 0.5 * (g[i] + g[i + 1])
        e = np.exp(gm * dx)
        K = K * e + (dx if abs(gm * dx) < 1e-12 else (e - 1.0) / gm)
        K_max = max(K_max, K)
    return 1.0 / K_max


def hf_radius_details(p: ProfileParams, cap: float = 2000.0, floor: float = 10.0,
                      n_samples: int = 160) -> dict:
    """Heuristic radius beyond which the determinant cannot vanish.

    Mirrors the contraction argument: ``C_hat`` bounds the ``O(1/lambda)``
    remainder ``N`` after two diagonalizations and ``c_hat`` bounds the decay
    of the kernel ``exp(int (M22 - M11))``; the radius is ``8 C_hat / c_hat``.
    """
    from .profile import ProfileFunction

    if p.case_tag not in (Case.SMOOTH, Case.SUBSHOCK):
        raise DomainError(f"no profile for case {p.case_tag.value}")
    fn = ProfileFunction(p, tail_tol=1e-6)
    x_lo = fn.left.x_end
    x_hi = 0.0 if fn.right is None else fn.right.x_end
    xs = np.linspace(x_lo, x_hi, n_samples)
    Hs = fn.H(xs)
    if fn.right is None:
        Hs[-1] = p.H_star
    probes = np.exp(1j * np.linspace(-0.5 * np.pi, 0.5 * np.pi, 5))
    C_hat = 0.0
    g = np.empty(n_samples)
    I = np.eye(2)
    for i, H in enumerate(Hs):
        mu, M, T, Tx = _diag_coefficients(H, p)
        Lam = np.diag(mu)
        N0 = M @ T - T @ M - Tx - T @ Lam @ T + T @ T @ Lam
        C_hat = max(C_hat, np.linalg.norm(N0, 2))
        for lam in probes:
            S = I + T / lam
            Nl = lam * (np.linalg.solve(S, (lam * Lam + M) @ S - Tx / lam)
                        - lam * Lam - np.diag(np.diag(M)))
            C_hat = max(C_hat, np.linalg.norm(Nl, 2))
        g[i] = M[1, 1] - M[0, 0]
    gap = _effective_gap(xs, g)
    raw = 8.0 * C_hat / gap if gap > 0 and np.isfinite(C_hat) else np.inf
    radius = min(max(raw, floor), cap)
    return {"radius": float(radius), "raw": float(raw), "C_hat": float(C_hat),
            "c_hat": float(gap), "capped": bool(raw > cap)}


def hf_radius(p: ProfileParams, override: float | None = None, cap: float = 2000.0,
              floor: float = 10.0) -> float:
    if override is not None:
        return float(override)
    return hf_radius_details(p, cap=cap, floor=floor)["radius"]
