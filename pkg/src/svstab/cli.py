"""Command-line interface: ``svstab <command> [options]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import DomainError
from .evans import EvansConfig, evans_lopatinsky_details, evans_smooth_details
from .frequency import splitting_boundary
from .fv import Grid, Perturbation, SimConfig, evolve_perturbed
from .profile import Case, derive_constants, integrate_profile
from .sweep import SweepSpec, default_F_values, existence_map, format_rows, sweep
from .winding import INCONCLUSIVE, process_map, stability_verdict

log = logging.getLogger("svstab")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _table(header, rows, fmt) -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(dict(zip(header, r))) + "\n" for r in rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _perturbation(text: str) -> Perturbation:
    kind, _, rest = text.partition(":")
    vals = _float_list(rest)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("expected kind:center,width,amplitude")
    return Perturbation(kind=kind, center=vals[0], width=vals[1], amplitude=vals[2])


# ---------------------------------------------------------------------------


def cmd_profile(a) -> int:
    p = derive_constants(a.F, a.HR)
    s = integrate_profile(p, x_min=a.xmin, x_max=a.xmax, n=a.n)
    rows = []
    for x, H, Q in zip(s.xs, s.Hs_vals, s.Qs_vals):
        rows.append([float(x), float(H), float(Q)])
        if s.shock_jump is not None and x == 0.0:
            Hr = s.shock_jump[1]
            rows.append([0.0, Hr, p.c * Hr - p.q0])
    _emit(_table(["x", "H", "Q"], rows, a.format), a.out)
    return 0


def cmd_det(a) -> int:
    p = derive_constants(a.F, a.HR)
    cfg = EvansConfig(order_N=a.order)
    lam = complex(a.re, a.im)
    if a.smooth and p.case_tag is not Case.SMOOTH:
        raise DomainError(f"--smooth requested but the profile is {p.case_tag.value}")
    if p.case_tag is Case.SMOOTH:
        val, diag = evans_smooth_details(lam, p, cfg)
    else:
        val, diag = evans_lopatinsky_details(lam, p, cfg)
    out = {"re": val.real, "im": val.imag, "case": p.case_tag.value,
           "N": diag["order_N"], "H_minus": diag["H_minus"], "ode_steps": diag["ode_steps"]}
    out.update({k: v for k, v in diag.items() if k not in ("order_N", "H_minus", "ode_steps")})
    _emit(json.dumps(out) + "\n", a.out)
    return 0


def cmd_stability(a) -> int:
    radius = None if a.radius == "auto" else float(a.radius)
    shift = None if a.shift == "auto" else float(a.shift)
    rep = stability_verdict(a.F, a.HR, EvansConfig(), radius_override=radius, r_min=a.rmin,
                            shift=shift, n_nodes=a.nodes, max_refine=a.max_refine,
                            map_fn=process_map(a.workers) if a.workers > 1 else None)
    if a.contour_out and rep.contour_points is not None:
        rows = [[float(z.real), float(z.imag), float(v.real), float(v.imag)]
                for z, v in zip(rep.contour_points, rep.contour_values)]
        Path(a.contour_out).write_text(_table(["re", "im", "re(\u0394)", "im(\u0394)"], rows, "csv"))
    _emit(json.dumps(rep.as_dict()) + "\n", a.out)
    return 1 if rep.status == INCONCLUSIVE else 0


def cmd_splitting(a) -> int:
    p = derive_constants(a.F, a.HR)
    rows = [list(r) for r in splitting_boundary(p, a.kappa_max, a.n)]
    _emit(_table(["re", "im", "branch"], rows, a.format), a.out)
    return 0


def cmd_existence(a) -> int:
    Fs = tuple(_float_list(a.F_values)) if a.F_values else default_F_values()
    rows = [list(r) for r in existence_map(SweepSpec(F_values=Fs))]
    _emit(_table(["F", "H_C"], rows, a.format), a.out)
    return 0


def cmd_sweep(a) -> int:
    Fs = tuple(_float_list(a.F_values)) if a.F_values else default_F_values()
    spec = SweepSpec(F_values=Fs, HR_step=a.hr_step, regime=a.regime, radius_cap=a.radius_cap,
                     out=None, workers=a.workers, fmt=a.format,
                     time_budget=a.timeout if a.timeout > 0 else None,
                     n_nodes=a.nodes, max_refine=a.max_refine, record_timings=a.timings)
    summary = sweep(spec)
    _emit(format_rows(summary.rows, a.format), a.out)
    sys.stderr.write(json.dumps({"total": summary.total, **summary.counts}) + "\n")
    return 0 if summary.all_stable else 1


def cmd_evolve(a) -> int:
    p = derive_constants(a.F, a.HR)
    g = Grid(a.xlo, a.xhi, a.cells)
    cfg = SimConfig(t_end=a.T, cfl=a.cfl, perturbation=a.perturb,
                    snapshot_times=tuple(_float_list(a.snapshots)), order=a.order)
    res = evolve_perturbed(p, g, cfg)
    diag = res.diagnostics()
    if a.out:
        outdir = Path(a.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for t, (x, h, q) in res.snapshots.items():
            rows = [[float(u), float(v), float(w)] for u, v, w in zip(x, h, q)]
            (outdir / f"snapshot_t{t:g}.csv").write_text(_table(["x", "h", "q"], rows, "csv"))
        (outdir / "diagnostics.json").write_text(json.dumps(diag, indent=1) + "\n")
    else:
        sys.stdout.write(json.dumps(diag) + "\n")
    return 0


# ---------------------------------------------------------------------------


def _global_flags(parser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--out", default=d(None), help="output file (directory for evolve)")
    parser.add_argument("--format", choices=("csv", "jsonl"), default=d("csv"))
    parser.add_argument("--workers", type=int, default=d(1))
    parser.add_argument("--seed", type=int, default=d(0))
    parser.add_argument("--verbose", "-v", action="count", default=d(0))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="svstab", description=__doc__)
    _global_flags(ap, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = ap.add_subparsers(dest="command", required=True)

    def pair(sp):
        sp.add_argument("--F", type=float, required=True)
        sp.add_argument("--HR", type=float, required=True)

    sp = sub.add_parser("profile", parents=[common], help="sample a profile as x,H,Q")
    pair(sp)
    sp.add_argument("--xmin", type=float, default=-20.0)
    sp.add_argument("--xmax", type=float, default=5.0)
    sp.add_argument("--n", type=int, default=1001)
    sp.set_defaults(func=cmd_profile)

    sp = sub.add_parser("det", parents=[common], help="evaluate the determinant at one lambda")
    pair(sp)
    sp.add_argument("--re", type=float, required=True)
    sp.add_argument("--im", type=float, default=0.0)
    sp.add_argument("--smooth", action="store_true")
    sp.add_argument("--order", type=int, default=60)
    sp.set_defaults(func=cmd_det)

    sp = sub.add_parser("stability", parents=[common], help="winding-number verdict")
    pair(sp)
    sp.add_argument("--rmin", type=float, default=0.1)
    sp.add_argument("--radius", default="auto")
    sp.add_argument("--shift", default="auto")
    sp.add_argument("--nodes", type=int, default=256)
    sp.add_argument("--max-refine", type=int, default=12)
    sp.add_argument("--contour-out")
    sp.set_defaults(func=cmd_stability)

    sp = sub.add_parser("splitting-boundary", parents=[common],
                        help="curves where a spatial eigenvalue is imaginary")
    pair(sp)
    sp.add_argument("--kappa-max", type=float, default=20.0)
    sp.add_argument("--n", type=int, default=801)
    sp.set_defaults(func=cmd_splitting)

    sp = sub.add_parser("existence-map", parents=[common], help="critical curve H_C(F)")
    sp.add_argument("--F-values")
    sp.set_defaults(func=cmd_existence)

    sp = sub.add_parser("sweep", parents=[common], help="stability verdicts on a grid")
    sp.add_argument("--regime", choices=("subshock", "smooth", "both"), default="both")
    sp.add_argument("--F-values", help="comma-separated Froude numbers")
    sp.add_argument("--hr-step", type=float, default=0.01)
    sp.add_argument("--radius-cap", type=float, default=2000.0)
    sp.add_argument("--timeout", type=float, default=300.0, help="seconds per point (0 = none)")
    sp.add_argument("--nodes", type=int, default=256)
    sp.add_argument("--max-refine", type=int, default=12)
    sp.add_argument("--timings", action="store_true", help="fill the wall_ms column")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("evolve", parents=[common], help="finite-volume perturbation experiment")
    pair(sp)
    sp.add_argument("--xlo", type=float, default=-12.0)
    sp.add_argument("--xhi", type=float, default=12.0)
    sp.add_argument("--cells", type=int, default=16000)
    sp.add_argument("--T", type=float, default=2.5)
    sp.add_argument("--cfl", type=float, default=0.9)
    sp.add_argument("--perturb", type=_perturbation, default=Perturbation("bump", 0.6, 0.4, 0.1))
    sp.add_argument("--snapshots", default="")
    sp.add_argument("--order", type=int, choices=(1, 2), default=2)
    sp.set_defaults(func=cmd_evolve)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except (DomainError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
