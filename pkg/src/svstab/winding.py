"""Winding numbers of analytic functions along closed contours, and stability verdicts."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BudgetExceeded, DomainError
from .evans import EvansConfig, determinant_for
from .frequency import hf_radius_details
from .profile import Case, derive_constants

STABLE, UNSTABLE, INCONCLUSIVE = "Stable", "Unstable", "Inconclusive"


@dataclass(frozen=True)
class Contour:
    """A closed, counterclockwise curve given by a map from ``t in [0, t_end]``.

    ``nodes`` are the initial sample points (``nodes[-1] == nodes[0]``) at the
    parameters ``ts``.
    """

    path: Callable[[float], complex] = field(repr=False)
    ts: np.ndarray
    nodes: np.ndarray
    r: float | None = None
    R: float | None = None
    a: float | None = None
    upper_half: tuple[float, float] | None = None

    @property
    def conjugate_symmetric(self) -> bool:
        return self.upper_half is not None

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])


def _closed(path, ts, **kw) -> Contour:
    ts = np.asarray(ts, dtype=float)
    nodes = np.array([path(t) for t in ts])
    nodes[-1] = nodes[0]
    return Contour(path=path, ts=ts, nodes=nodes, **kw)


class _HalfAnnulusPath:
    """``t in [0,1)`` outer arc, ``[1,2)`` upper segment, ``[2,3)`` inner arc, ``[3,4]`` lower segment."""

    def __init__(self, r, R, a):
        self.r, self.R, self.a = r, R, a

    def __call__(self, t: float) -> complex:
        r, R, a = self.r, self.R, self.a
        k = min(int(math.floor(t)), 3)
        u = t - k
        if k == 0:
            return -a + R * complex(math.cos(math.pi * (u - 0.5)), math.sin(math.pi * (u - 0.5)))
        if k == 1:
            return complex(-a, R * (r / R) ** u)
        if k == 2:
            return -a + r * complex(math.cos(math.pi * (0.5 - u)), math.sin(math.pi * (0.5 - u)))
        return complex(-a, -r * (R / r) ** u)


def build_contour(r: float, R: float, a: float = 0.0, n_per_arc: int = 64) -> Contour:
    """Boundary of ``{lambda - a : Re lambda > 0, r < |lambda| < R}``.

    Nodes are spaced uniformly in ``log(lambda + a)``: each arc receives
    ``n_per_arc`` intervals and each straight piece ``n_per_arc * log(R/r) / pi``
    geometrically graded ones (at least four).
    """
    if not 0.0 < r < R:
        raise DomainError(f"need 0 < r < R, got r={r}, R={R}")
    if a < 0.0:
        raise DomainError("shift a must be nonnegative")
    n_arc = max(4, int(n_per_arc))
    n_seg = max(4, int(math.ceil(n_per_arc * math.log(R / r) / math.pi)))
    pieces = []
    for k, n in enumerate((n_arc, n_seg, n_arc, n_seg)):
        pieces.append(k + np.arange(n) / n)
    ts = np.concatenate(pieces + [np.array([4.0])])
    return _closed(_HalfAnnulusPath(r, R, a), ts, r=r, R=R, a=a, upper_half=(0.5, 2.5))


def contour_for_total_nodes(r: float, R: float, a: float, n_nodes: int) -> Contour:
    """Half-annulus contour with about ``n_nodes`` initial nodes in total."""
    weight = 2.0 * math.pi + 2.0 * math.log(R / r)
    return build_contour(r, R, a, n_per_arc=max(4, round(n_nodes * math.pi / weight)))


def circle_contour(center: complex = 0.0, radius: float = 1.0, n: int = 64) -> Contour:
    if radius <= 0:
        raise DomainError("radius must be positive")
    center = complex(center)

    def path(t):
        return center + radius * complex(math.cos(2 * math.pi * t), math.sin(2 * math.pi * t))

    return _closed(path, np.linspace(0.0, 1.0, int(n) + 1), r=radius, R=radius,
                   upper_half=(0.0, 0.5) if center.imag == 0.0 else None)


# ---------------------------------------------------------------------------


@dataclass
class WindingResult:
    winding: int
    residual: float
    converged: bool
    evaluations: int
    ts: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.converged and not self.failures and self.residual < 0.05


def _safe_eval(f, path, t, t_span, failures):
    """Evaluate ``f(path(t))``; a zero value triggers one perturbed retry."""
    lam = path(t)
    try:
        v = complex(f(lam))
        if v == 0 or not np.isfinite(v):
            t2 = t + 1e-7 * t_span
            lam = path(t2)
            v = complex(f(lam))
            t = t2
        if v == 0 or not np.isfinite(v):
            failures.append({"lambda": [lam.real, lam.imag], "error": "zero or non-finite value"})
            return t, lam, None
        return t, lam, v
    except BudgetExceeded:
        raise
    except Exception as exc:  # evaluation failures are reported, not fatal
        failures.append({"lambda": [lam.real, lam.imag], "error": f"{type(exc).__name__}: {exc}"})
        return t, lam, None


def _fold(f, path, ts, max_refine, map_fn):
    """Sum argument increments over consecutive parameters, bisecting large jumps."""
    failures: list = []
    span = ts[-1] - ts[0]
    if map_fn is None:
        first = [_safe_eval(f, path, t, span, failures) for t in ts]
    else:
        lams = [path(t) for t in ts]
        raw = list(map_fn(f, lams))
        first = []
        for t, lam, v in zip(ts, lams, raw):
            if v is None or v == 0 or not np.isfinite(v):
                first.append(_safe_eval(f, path, t, span, failures))
            else:
                first.append((t, lam, complex(v)))
    if failures:
        pts = [x[1] for x in first]
        vals = [np.nan if x[2] is None else x[2] for x in first]
        return 0.0, False, len(first), failures, ts, pts, vals

    evals = len(first)
    out_t, out_p, out_v = [first[0][0]], [first[0][1]], [first[0][2]]
    total = 0.0
    converged = True
    for k in range(len(first) - 1):
        stack = [(first[k], first[k + 1], 0)]
        while stack:
            (ta, pa, va), (tb, pb, vb), depth = stack.pop()
            d = float(np.angle(vb / va))
            if abs(d) > 0.5 * math.pi and depth < max_refine:
                mid = _safe_eval(f, path, 0.5 * (ta + tb), span, failures)
                evals += 1
                if mid[2] is None:
                    return total, False, evals, failures, out_t, out_p, out_v
                # right half pushed first so the left half is processed first
                stack.append((mid, (tb, pb, vb), depth + 1))
                stack.append(((ta, pa, va), mid, depth + 1))
                continue
            if abs(d) > 0.5 * math.pi:
                converged = False
            total += d
            out_t.append(tb)
            out_p.append(pb)
            out_v.append(vb)
    return total, converged, evals, failures, out_t, out_p, out_v


def winding_details(f: Callable[[complex], complex], c: Contour, max_refine: int = 12,
                    use_symmetry: bool = False, map_fn=None) -> WindingResult:
    """Winding number of ``f`` around ``c`` by summed principal-argument increments.

    With ``use_symmetry`` (valid when ``f(conj z) = conj f(z)`` and the contour
    is symmetric) only the upper half is traced and the argument change is
    divided by ``pi``.  ``map_fn(f, points)`` may evaluate the initial nodes in
    parallel.
    """
    ts = np.asarray(c.ts)
    if use_symmetry:
        if not c.conjugate_symmetric:
            raise DomainError("contour is not symmetric about the real axis")
        lo, hi = c.upper_half
        inner = ts[(ts > lo) & (ts < hi)]
        ts = np.concatenate([[lo], inner, [hi]])
        divisor = math.pi
    else:
        divisor = 2.0 * math.pi
    total, converged, evals, failures, ot, op, ov = _fold(f, c.path, ts, max_refine, map_fn)
    w = total / divisor
    n = int(round(w))
    return WindingResult(winding=n, residual=abs(w - n), converged=converged, evaluations=evals,
                         ts=np.asarray(ot), points=np.asarray(op), values=np.asarray(ov),
                         failures=failures)


def winding_number(f: Callable[[complex], complex], c: Contour, max_refine: int = 12) -> int:
    res = winding_details(f, c, max_refine)
    if not res.ok:
        raise ArithmeticError(
            f"winding number inconclusive (residual {res.residual:.3g}, "
            f"converged={res.converged}, failures={len(res.failures)})")
    return res.winding


def _try_call(f, lam):
    try:
        return complex(f(lam))
    except BudgetExceeded:
        raise
    except Exception:
        return None


def process_map(workers: int):
    """A ``map_fn`` evaluating the initial contour nodes in a process pool.

    Failed evaluations come back as ``None`` and are retried serially, so the
    error is recorded with its context.
    """
    from concurrent.futures import ProcessPoolExecutor
    from functools import partial

    def run(f, lams):
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(partial(_try_call, f), lams, chunksize=8))

    return run


# ---------------------------------------------------------------------------


@dataclass
class StabilityReport:
    F: float
    H_R: float
    case_tag: Case
    winding: int | None
    radius_used: float
    shift_used: float
    node_count_final: int
    wall_time: float
    status: str
    radius_capped: bool = False
    residual: float = 0.0
    failed_nodes: list = field(default_factory=list)
    message: str = ""
    contour_points: np.ndarray | None = field(default=None, repr=False)
    contour_values: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {"F": self.F, "H_R": self.H_R, "case": self.case_tag.value,
                "winding": self.winding, "status": self.status,
                "radius": self.radius_used, "radius_capped": self.radius_capped,
                "shift": self.shift_used, "nodes": self.node_count_final,
                "residual": self.residual, "wall_time": self.wall_time,
                "failed_nodes": self.failed_nodes, "message": self.message}


class _Budgeted:
    def __init__(self, f, deadline):
        self.f, self.deadline = f, deadline

    def __call__(self, lam):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise BudgetExceeded("time budget exhausted")
        return self.f(lam)


def stability_verdict(F: float, H_R: float, cfg: EvansConfig = EvansConfig(),
                      radius_override: float | None = None, r_min: float = 0.1,
                      shift: float | None = None, n_nodes: int = 256, max_refine: int = 12,
                      time_budget: float | None = None, radius_cap: float = 2000.0,
                      map_fn=None) -> StabilityReport:
    """Count zeros of the profile's determinant inside the shifted half-annulus."""
    t0 = time.monotonic()
    p = derive_constants(F, H_R)
    if p.case_tag not in (Case.SMOOTH, Case.SUBSHOCK):
        raise DomainError(f"no stability analysis for case {p.case_tag.value}")
    if shift is None:
        shift = 1e-6 if p.case_tag is Case.SUBSHOCK else 0.0
    capped = False
    if radius_override is None:
        info = hf_radius_details(p, cap=radius_cap)
        radius, capped = info["radius"], info["capped"]
    else:
        radius = float(radius_override)
    contour = contour_for_total_nodes(r_min, radius, shift, n_nodes)
    f = _Budgeted(determinant_for(p, cfg),
                  None if time_budget is None else t0 + time_budget)

    def report(status, winding=None, res=None, msg=""):
        return StabilityReport(
            F=F, H_R=H_R, case_tag=p.case_tag, winding=winding, radius_used=float(radius),
            shift_used=float(shift), node_count_final=0 if res is None else len(res.ts),
            wall_time=time.monotonic() - t0, status=status, radius_capped=capped,
            residual=0.0 if res is None else float(res.residual),
            failed_nodes=[] if res is None else res.failures, message=msg,
            contour_points=None if res is None else res.points,
            contour_values=None if res is None else res.values)

    try:
        res = winding_details(f, contour, max_refine, map_fn=map_fn)
    except BudgetExceeded:
        return report(INCONCLUSIVE, msg="time budget exhausted")
    if not res.ok:
        msg = "evaluation failures" if res.failures else "refinement did not converge"
        return report(INCONCLUSIVE, res.winding, res, msg)
    return report(STABLE if res.winding == 0 else UNSTABLE, res.winding, res)
