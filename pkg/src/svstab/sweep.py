"""Parameter sweeps of stability verdicts over the existence domain."""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .evans import EvansConfig
from .profile import critical_height
from .winding import INCONCLUSIVE, STABLE, UNSTABLE, stability_verdict

log = logging.getLogger(__name__)

COLUMNS = ["F", "H_R", "case", "winding", "status", "radius", "radius_capped", "wall_ms", "nodes"]
_GRID_TOL = 1e-12


def default_F_values(step: float = 0.05, stop: float = 1.95) -> tuple:
    n = int(round(stop / step))
    return tuple(round(k * step, 10) for k in range(1, n + 1))


def subshock_heights(F: float, step: float = 0.01) -> list[float]:
    """``H_R = step, 2 step, ...`` up to ``H_C(F) - step`` inclusive."""
    top = critical_height(F) - step
    out, j = [], 1
    while j * step <= top + _GRID_TOL:
        out.append(round(j * step, 10))
        j += 1
    return out


def smooth_heights(F: float, step: float = 0.01) -> list[float]:
    """``H_R = 1 - step`` downward to ``H_C(F) + step`` inclusive."""
    if F >= 2.0:
        return []
    bottom = critical_height(F) + step
    out, j = [], int(round(1.0 / step)) - 1
    while j >= 1 and j * step >= bottom - _GRID_TOL:
        out.append(round(j * step, 10))
        j -= 1
    return out


@dataclass(frozen=True)
class SweepSpec:
    F_values: tuple = field(default_factory=default_F_values)
    HR_step: float = 0.01
    regime: str = "both"
    radius_cap: float = 2000.0
    out: str | None = None
    workers: int = 1
    fmt: str = "csv"
    time_budget: float | None = 300.0
    n_nodes: int = 256
    max_refine: int = 12
    record_timings: bool = False
    points: tuple | None = None

    def grid(self) -> list[tuple[float, float]]:
        """Grid points ordered F-major, then ``H_R`` ascending."""
        if self.points is not None:
            return sorted((float(F), float(h)) for F, h in self.points)
        if self.regime not in ("subshock", "smooth", "both"):
            raise ValueError(f"unknown regime {self.regime!r}")
        pts = []
        for F in self.F_values:
            hs = []
            if self.regime in ("subshock", "both"):
                hs += subshock_heights(F, self.HR_step)
            if self.regime in ("smooth", "both"):
                hs += smooth_heights(F, self.HR_step)
            pts += [(F, h) for h in sorted(hs)]
        return pts


@dataclass
class SweepSummary:
    rows: list
    counts: dict
    total: int

    @property
    def all_stable(self) -> bool:
        return self.counts.get(UNSTABLE, 0) == 0 and self.counts.get(INCONCLUSIVE, 0) == 0


def _evaluate(args) -> dict:
    F, H_R, spec = args
    t0 = time.monotonic()
    try:
        rep = stability_verdict(F, H_R, EvansConfig(), radius_cap=spec.radius_cap,
                                n_nodes=spec.n_nodes, max_refine=spec.max_refine,
                                time_budget=spec.time_budget)
        row = {"F": F, "H_R": H_R, "case": rep.case_tag.value, "winding": rep.winding,
               "status": rep.status, "radius": rep.radius_used,
               "radius_capped": rep.radius_capped, "nodes": rep.node_count_final}
    except Exception as exc:  # a failing point must not abort the sweep
        log.warning("point F=%s H_R=%s failed: %s", F, H_R, exc)
        row = {"F": F, "H_R": H_R, "case": "", "winding": None, "status": INCONCLUSIVE,
               "radius": None, "radius_capped": False, "nodes": 0}
    row["wall_ms"] = round(1000.0 * (time.monotonic() - t0)) if spec.record_timings else None
    return row


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_rows(rows, fmt: str = "csv") -> str:
    if fmt == "jsonl":
        return "".join(json.dumps({k: r[k] for k in COLUMNS}) + "\n" for r in rows)
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_cell(r[k]) for k in COLUMNS])
    return buf.getvalue()


def sweep(spec: SweepSpec) -> SweepSummary:
    pts = spec.grid()
    jobs = [(F, h, spec) for F, h in pts]
    if spec.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            rows = list(ex.map(_evaluate, jobs, chunksize=1))
    else:
        rows = [_evaluate(j) for j in jobs]
    rows.sort(key=lambda r: (r["F"], r["H_R"]))
    counts = {STABLE: 0, UNSTABLE: 0, INCONCLUSIVE: 0}
    for r in rows:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    if spec.out:
        Path(spec.out).write_text(format_rows(rows, spec.fmt))
    return SweepSummary(rows=rows, counts=counts, total=len(rows))


def existence_map(spec: SweepSpec | None = None) -> list[tuple[float, float]]:
    """Separating curve ``(F, H_C(F))`` on the sweep's Froude grid; written as CSV if ``spec.out``."""
    spec = spec or SweepSpec()
    rows = [(float(F), critical_height(F)) for F in spec.F_values]
    if spec.out:
        with Path(spec.out).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["F", "H_C"])
            for F, hc in rows:
                w.writerow([repr(F), repr(hc)])
    return rows
