"""Compiled inner loops for the determinant engine.

The evolution matrix is hard-coded here in closed form so the adaptive
Dormand-Prince 8(5,3) integrator can run without Python callbacks.  The
Butcher tableau and error weights are borrowed from scipy.
"""
from __future__ import annotations

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _dop

N_STAGES = _dop.N_STAGES
TAB_A = np.ascontiguousarray(_dop.A[:N_STAGES, :N_STAGES])
TAB_B = np.ascontiguousarray(_dop.B)
TAB_C = np.ascontiguousarray(_dop.C[:N_STAGES])
TAB_E3 = np.ascontiguousarray(_dop.E3)
TAB_E5 = np.ascontiguousarray(_dop.E5)

# layout of the real parameter vector
P_F, P_HR, P_C, P_Q0, P_H3, P_HS, P_MUSIGN, P_MUREF, P_WKB = range(9)

OK, MAX_STEPS, STEP_COLLAPSE, NONFINITE = 0, 1, 2, 3


@njit(cache=True)
def mode_rhs(H, y, prm, lam, gam, out):
    F = prm[P_F]
    HR = prm[P_HR]
    c = prm[P_C]
    q0 = prm[P_Q0]
    F2 = F * F
    Q = c * H - q0
    H2 = H * H
    H3c = H2 * H
    S = H3c - prm[P_HS] ** 3
    Hp = F2 * (H - 1.0) * (H - HR) * (H - prm[P_H3]) / S
    a21 = H / F2 - Q * Q / H2
    a22 = 2.0 * Q / H - c
    det = -S / (F2 * H2)
    # inverse of [[-c, 1], [a21, a22]]
    i11 = a22 / det
    i12 = -1.0 / det
    i21 = -a21 / det
    i22 = -c / det
    e21 = 2.0 * Q * Q / H3c + 1.0
    e22 = -2.0 * Q / H2
    k21 = 1.0 / F2 - 2.0 * c * Q / H2 + 2.0 * Q * Q / H3c
    k22 = 2.0 * q0 / H2
    # A^{-1}(E - lam I)
    b11 = -lam * i11 + i12 * e21
    b12 = i12 * (e22 - lam)
    b21 = -lam * i21 + i22 * e21
    b22 = i22 * (e22 - lam)
    shift = gam
    if prm[P_WKB] != 0.0:
        sr = np.sqrt(HR) + 1.0
        mu = F * H * sr / (F * HR + prm[P_MUSIGN] * H ** 1.5 * sr)
        shift = gam + lam * (mu - prm[P_MUREF])
    inv_hp = 1.0 / Hp
    m11 = (b11 - shift) * inv_hp - i12 * k21
    m12 = b12 * inv_hp - i12 * k22
    m21 = b21 * inv_hp - i22 * k21
    m22 = (b22 - shift) * inv_hp - i22 * k22
    out[0] = m11 * y[0] + m12 * y[1]
    out[1] = m21 * y[0] + m22 * y[1]


@njit(cache=True)
def _wnorm(v, scale):
    s = 0.0
    for i in range(v.shape[0]):
        s += (abs(v[i]) / scale[i]) ** 2
    return np.sqrt(s / v.shape[0])


@njit(cache=True)
def integrate_mode(H0, H1, y0, prm, lam, gam, rtol, atol, max_steps):
    """Integrate the mode ODE from ``H0`` to ``H1``.

    Returns ``(y, status, accepted_steps, rejected_steps, H_reached)``.
    """
    y = y0.copy()
    n = y.shape[0]
    if H1 == H0:
        return y, OK, 0, 0, H0
    direction = 1.0 if H1 > H0 else -1.0
    K = np.zeros((N_STAGES + 1, n), dtype=np.complex128)
    f = np.empty(n, dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)
    y_new = np.empty(n, dtype=np.complex128)
    scale = np.empty(n)
    mode_rhs(H0, y, prm, lam, gam, f)

    for i in range(n):
        scale[i] = atol + abs(y[i]) * rtol
    d0 = _wnorm(y, scale)
    d1 = _wnorm(f, scale)
    span = abs(H1 - H0)
    if d0 < 1e-5 or d1 < 1e-5:
        h_abs = 1e-6 * span
    else:
        h_abs = 0.01 * d0 / d1
    h_abs = min(h_abs, span)

    t = H0
    accepted = 0
    rejected = 0
    safety, min_factor, max_factor = 0.9, 0.2, 10.0
    exponent = -1.0 / 8.0
    last_rejected = False
    while direction * (H1 - t) > 0.0:
        if accepted + rejected >= max_steps:
            return y, MAX_STEPS, accepted, rejected, t
        min_step = 10.0 * abs(np.nextafter(t, direction * np.inf) - t)
        if h_abs < min_step:
            return y, STEP_COLLAPSE, accepted, rejected, t
        h = h_abs * direction
        t_new = t + h
        if direction * (t_new - H1) > 0.0:
            t_new = H1
        h = t_new - t
        h_abs = abs(h)

        for i in range(n):
            K[0, i] = f[i]
        for s in range(1, N_STAGES):
            for i in range(n):
                acc = 0.0j
                for j in range(s):
                    acc += TAB_A[s, j] * K[j, i]
                tmp[i] = y[i] + h * acc
            mode_rhs(t + TAB_C[s] * h, tmp, prm, lam, gam, K[s])
        for i in range(n):
            acc = 0.0j
            for j in range(N_STAGES):
                acc += TAB_B[j] * K[j, i]
            y_new[i] = y[i] + h * acc
        mode_rhs(t_new, y_new, prm, lam, gam, K[N_STAGES])

        err5 = 0.0
        err3 = 0.0
        finite = True
        for i in range(n):
            sc = atol + max(abs(y[i]), abs(y_new[i])) * rtol
            a5 = 0.0j
            a3 = 0.0j
            for j in range(N_STAGES + 1):
                a5 += TAB_E5[j] * K[j, i]
                a3 += TAB_E3[j] * K[j, i]
            err5 += (abs(a5) / sc) ** 2
            err3 += (abs(a3) / sc) ** 2
            if not np.isfinite(y_new[i].real) or not np.isfinite(y_new[i].imag):
                finite = False
        if not finite:
            return y, NONFINITE, accepted, rejected, t
        if err5 == 0.0 and err3 == 0.0:
            err = 0.0
        else:
            err = h_abs * err5 / np.sqrt((err5 + 0.01 * err3) * n)

        if err < 1.0:
            factor = max_factor if err == 0.0 else min(max_factor, safety * err ** exponent)
            if last_rejected:
                factor = min(1.0, factor)
            h_abs *= factor
            t = t_new
            for i in range(n):
                y[i] = y_new[i]
                f[i] = K[N_STAGES, i]
            accepted += 1
            last_rejected = False
        else:
            h_abs *= max(min_factor, safety * err ** exponent)
            rejected += 1
            last_rejected = True
    return y, OK, accepted, rejected, t


@njit(cache=True)
def series_coefficients(N0, Nl, Ng, dcoef, lam, gam, c0, order):
    """Frobenius-type recursion ``(n d_0 I - N_0) c_n = sum_j (N_j - (n-j) d_j I) c_{n-j}``.

    ``N0, Nl, Ng`` hold polynomial coefficients of shape ``(deg+1, 2, 2)`` in the
    shifted variable; ``dcoef`` is the reduced denominator.  Returns the
    coefficient array and the first resonant order (``-1`` if none).
    """
    deg = N0.shape[0] - 1
    Nt = np.empty((deg + 1, 2, 2), dtype=np.complex128)
    for j in range(deg + 1):
        for a in range(2):
            for b in range(2):
                Nt[j, a, b] = N0[j, a, b] + lam * Nl[j, a, b] + gam * Ng[j, a, b]
    coeffs = np.zeros((order + 1, 2), dtype=np.complex128)
    coeffs[0, 0] = c0[0]
    coeffs[0, 1] = c0[1]
    scale = 0.0
    for a in range(2):
        for b in range(2):
            scale = max(scale, abs(Nt[0, a, b]))
    scale = max(scale, abs(dcoef[0]))
    for n in range(1, order + 1):
        m11 = n * dcoef[0] - Nt[0, 0, 0]
        m12 = -Nt[0, 0, 1]
        m21 = -Nt[0, 1, 0]
        m22 = n * dcoef[0] - Nt[0, 1, 1]
        det = m11 * m22 - m12 * m21
        if abs(det) <= 1e-13 * (n * scale) ** 2:
            return coeffs, n
        r0 = 0.0j
        r1 = 0.0j
        for j in range(1, min(n, deg) + 1):
            dj = (n - j) * dcoef[j]
            v0 = coeffs[n - j, 0]
            v1 = coeffs[n - j, 1]
            r0 += (Nt[j, 0, 0] - dj) * v0 + Nt[j, 0, 1] * v1
            r1 += Nt[j, 1, 0] * v0 + (Nt[j, 1, 1] - dj) * v1
        coeffs[n, 0] = (m22 * r0 - m12 * r1) / det
        coeffs[n, 1] = (m11 * r1 - m21 * r0) / det
    return coeffs, -1
