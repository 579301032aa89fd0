"""Hydraulic shock profiles with the left equilibrium rescaled to ``H_L = 1``.

Profiles are traveling waves ``(H, Q)(x - ct)`` connecting ``H_L = 1`` to
``H_R < 1``.  Along a profile ``Q = cH - q0`` and the height solves the scalar
ODE returned by :func:`profile_rhs`.  Large-amplitude waves (``H_R < H_C``)
contain a Lax 2-subshock from ``H_star`` down to ``H_R``, pinned at ``x = 0``.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, IntegrationError, SingularPointError


class Case(str, enum.Enum):
    SMOOTH = "Smooth"
    SUBSHOCK = "Subshock"
    DEGENERATE = "DegenerateCritical"
    NONE = "NoAdmissibleProfile"


def critical_height(F: float) -> float:
    """Right state separating smooth and subshock profiles."""
    return 2.0 * F**2 / (1.0 + 2.0 * F + math.sqrt(1.0 + 4.0 * F))


def classify(F: float, H_R: float) -> Case:
    _check_inputs(F, H_R)
    if F >= 2.0:
        return Case.NONE
    H_C = critical_height(F)
    if H_R < H_C:
        return Case.SUBSHOCK
    if H_R == H_C:
        return Case.DEGENERATE
    return Case.SMOOTH


def _check_inputs(F, H_R):
    if not F > 0:
        raise DomainError(f"F must be positive, got {F}")
    if not 0.0 < H_R < 1.0:
        raise DomainError(f"H_R must lie in (0, 1), got {H_R}")


@dataclass(frozen=True)
class ProfileParams:
    F: float
    H_R: float
    nu: float
    c: float
    q0: float
    H_star: float
    H_3: float
    H_s: float
    H_C: float
    case_tag: Case

    @property
    def Q_R(self) -> float:
        return self.c * self.H_R - self.q0

    @property
    def Q_star(self) -> float:
        return self.c * self.H_star - self.q0

    @property
    def slope_left(self) -> float:
        """Linear decay rate of ``H - 1`` as ``x -> -inf`` (derivative of the RHS at ``H = 1``)."""
        return self.F**2 * (1.0 - self.H_R) * (1.0 - self.H_3) / (1.0 - self.H_s**3)

    @property
    def slope_right(self) -> float:
        """Derivative of the profile RHS at ``H = H_R`` (negative in the smooth case)."""
        H = self.H_R
        return self.F**2 * (H - 1.0) * (H - self.H_3) / (H**3 - self.H_s**3)


def derive_constants(F: float, H_R: float) -> ProfileParams:
    _check_inputs(F, H_R)
    nu = 1.0 / math.sqrt(H_R)
    c = (nu**2 + nu + 1.0) / (nu + 1.0) * math.sqrt(H_R)
    q0 = nu**2 / (nu + 1.0) * H_R**1.5
    root = math.sqrt(8.0 * F**2 * nu**4 + nu**2 + 2.0 * nu + 1.0)
    H_star = (-nu - 1.0 + root) / (2.0 * (nu + 1.0)) * H_R
    H_3 = nu**2 / (nu + 1.0) ** 2 * H_R
    H_s = (F * nu**2 / (nu + 1.0)) ** (2.0 / 3.0) * H_R
    return ProfileParams(
        F=F, H_R=H_R, nu=nu, c=c, q0=q0, H_star=H_star, H_3=H_3, H_s=H_s,
        H_C=critical_height(F), case_tag=classify(F, H_R),
    )


def profile_rhs(H, p: ProfileParams):
    """``H'`` along the profile; singular at the sonic height ``H_s``."""
    H = np.asarray(H, dtype=float)
    den = H**3 - p.H_s**3
    if np.any(den == 0.0):
        raise SingularPointError(f"profile ODE is singular at the sonic height {p.H_s}")
    out = p.F**2 * (H - 1.0) * (H - p.H_R) * (H - p.H_3) / den
    return out if out.ndim else float(out)


def check_rankine_hugoniot(p: ProfileParams, H_star: float | None = None) -> float:
    """Residual of the scalar jump condition between ``H_star`` and ``H_R``."""
    Hs = p.H_star if H_star is None else H_star
    g = lambda H: p.q0**2 / H + H**2 / (2.0 * p.F**2)
    return abs(g(Hs) - g(p.H_R))


def alpha(H, p: ProfileParams):
    """Characteristic speeds of ``dF - cI`` along the profile, ``(alpha_-, alpha_+)``."""
    a = np.sqrt(H) / p.F
    return -p.q0 / H - a, -p.q0 / H + a


def lax_check(p: ProfileParams) -> bool:
    """Lax 2-shock test for the subshock ``H_star -> H_R``."""
    if not (p.H_R < p.H_s < p.H_star):
        return False
    am_l, ap_l = alpha(p.H_star, p)
    am_r, ap_r = alpha(p.H_R, p)
    return bool(am_l < 0.0 < ap_l and am_r < 0.0 and ap_r < 0.0)


# ---------------------------------------------------------------------------
# integration


@dataclass(frozen=True)
class ProfileSample:
    xs: np.ndarray
    Hs_vals: np.ndarray
    Qs_vals: np.ndarray
    shock_jump: tuple[float, float] | None = None
    params: ProfileParams | None = field(default=None, repr=False)

    def to_csv(self, path) -> None:
        """Write ``x,H,Q``; the shock row is duplicated at ``x = 0`` with both one-sided values."""
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "H", "Q"])
            for x, H, Q in zip(self.xs, self.Hs_vals, self.Qs_vals):
                w.writerow([repr(float(x)), repr(float(H)), repr(float(Q))])
                if self.shock_jump is not None and x == 0.0:
                    Hr = self.shock_jump[1]
                    Qr = self.params.c * Hr - self.params.q0
                    w.writerow(["0.0", repr(float(Hr)), repr(float(Qr))])


class _Branch:
    """One monotone smooth piece, integrated in the deviation from its limit."""

    def __init__(self, p, H0, limit, direction, tail_tol, rtol):
        self.limit = limit
        sign = 1.0 if H0 > limit else -1.0
        self.sign = sign
        rate = abs(p.slope_left if limit == 1.0 else p.slope_right)
        z0 = abs(H0 - limit)
        span = 1.5 * math.log(max(z0, tail_tol) / tail_tol) / rate + 5.0

        def rhs(x, z):
            return [sign * profile_rhs(limit + sign * z[0], p)]

        def reached_tail(x, z):
            return z[0] - tail_tol

        reached_tail.terminal = True
        sol = solve_ivp(
            rhs, (0.0, direction * span), [z0], method="DOP853",
            rtol=rtol, atol=tail_tol * 1e-4, dense_output=True, events=reached_tail,
        )
        if sol.status < 0:
            raise IntegrationError(
                "profile integration failed near the end equilibrium",
                {"message": sol.message, "limit": limit, "x_reached": float(sol.t[-1]),
                 "deviation": float(sol.y[0, -1])},
            )
        if sol.status == 0 and sol.y[0, -1] > tail_tol:
            raise IntegrationError(
                "profile tail not reached within the integration span",
                {"limit": limit, "x_reached": float(sol.t[-1]), "deviation": float(sol.y[0, -1])},
            )
        self.sol = sol
        self.x_end = float(sol.t[-1])
        self.direction = direction

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = self.direction * x < self.direction * self.x_end
        z = np.zeros_like(x)
        if np.any(inside):
            z[inside] = self.sol.sol(x[inside])[0]
        return self.limit + self.sign * z


class ProfileFunction:
    """Evaluate ``H(x)`` and ``Q(x)`` of a profile at arbitrary positions.

    For subshock profiles ``H(0)`` returns the left value ``H_star``.
    """

    def __init__(self, p: ProfileParams, tail_tol: float = 1e-12, rtol: float = 1e-10):
        if p.case_tag not in (Case.SMOOTH, Case.SUBSHOCK):
            raise DomainError(f"no profile to integrate for case {p.case_tag.value}")
        self.params = p
        if p.case_tag is Case.SUBSHOCK:
            self.left = _Branch(p, p.H_star, 1.0, -1.0, tail_tol, rtol)
            self.right = None
        else:
            H0 = 0.5 * (1.0 + p.H_R)
            self.left = _Branch(p, H0, 1.0, -1.0, tail_tol, rtol)
            self.right = _Branch(p, H0, p.H_R, 1.0, tail_tol, rtol)

    def H(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        neg = x <= 0.0
        out[neg] = self.left(x[neg])
        if self.right is None:
            out[~neg] = self.params.H_R
        else:
            out[~neg] = self.right(x[~neg])
        return out

    def Q(self, x):
        return self.params.c * self.H(x) - self.params.q0


def integrate_profile(p: ProfileParams, x_min: float = -20.0, x_max: float = 5.0,
                      n: int = 1001, tail_tol: float = 1e-12) -> ProfileSample:
    if not x_min < 0.0 < x_max:
        raise DomainError("the sampling window must contain x = 0")
    fn = ProfileFunction(p, tail_tol=tail_tol)
    if p.case_tag is Case.SUBSHOCK:
        n_left = max(2, int(round(n * -x_min / (x_max - x_min))))
        xs = np.concatenate([np.linspace(x_min, 0.0, n_left),
                             np.linspace(0.0, x_max, n - n_left + 1)[1:]])
        jump = (p.H_star, p.H_R)
    else:
        xs = np.linspace(x_min, x_max, n)
        jump = None
    H = fn.H(xs)
    return ProfileSample(xs=xs, Hs_vals=H, Qs_vals=p.c * H - p.q0, shock_jump=jump, params=p)
