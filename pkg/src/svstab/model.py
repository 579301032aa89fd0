"""Nondimensional inclined Saint-Venant model.

States are ``(h, q)`` with ``q = h u`` the total flow.  All matrices here are
plain 2x2 numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class State:
    h: float
    q: float


@dataclass(frozen=True)
class ModelParams:
    F: float

    def __post_init__(self):
        if not self.F > 0:
            raise DomainError(f"Froude number must be positive, got {self.F}")


def _check_h(h):
    if not h > 0:
        raise DomainError(f"height must be positive, got {h}")


def flux(s: State, m: ModelParams) -> tuple[float, float]:
    _check_h(s.h)
    return s.q, s.q**2 / s.h + s.h**2 / (2.0 * m.F**2)


def source(s: State) -> tuple[float, float]:
    """Relaxation source ``(0, h - |q| q / h^2)``."""
    _check_h(s.h)
    return 0.0, s.h - abs(s.q) * s.q / s.h**2


def equilibrium_flux(h: float) -> float:
    if h < 0:
        raise DomainError(f"height must be nonnegative, got {h}")
    return h**1.5


def jacobian_A(s: State, c: float, m: ModelParams) -> np.ndarray:
    """``dF(W) - c I`` at ``W = (H, Q)``."""
    _check_h(s.h)
    H, Q = s.h, s.q
    return np.array([[-c, 1.0], [H / m.F**2 - Q**2 / H**2, 2.0 * Q / H - c]])


def relaxation_E(s: State) -> np.ndarray:
    """Jacobian of the source term."""
    _check_h(s.h)
    H, Q = s.h, s.q
    return np.array([[0.0, 0.0], [2.0 * Q**2 / H**3 + 1.0, -2.0 * Q / H**2]])


def symmetrizer_A0(s: State, m: ModelParams) -> np.ndarray:
    """Friedrichs symmetrizer making ``A0 A`` symmetric and ``A0 E <= 0``."""
    if not (s.h > 0 and s.q > 0):
        raise DomainError(f"symmetrizer requires h > 0 and q > 0, got {s}")
    H, Q, F2 = s.h, s.q, m.F**2
    a11 = 2.0 * Q * (F2 * H**3 + F2 * Q**2 + H**3) / (F2 * H)
    a12 = -(H**3) - 2.0 * Q**2
    return np.array([[a11, a12], [a12, 2.0 * H * Q]])


def characteristic_speeds(s: State, m: ModelParams) -> tuple[float, float]:
    """Lab-frame characteristic speeds ``q/h -/+ sqrt(h)/F``."""
    _check_h(s.h)
    u, a = s.q / s.h, np.sqrt(s.h) / m.F
    return u - a, u + a
