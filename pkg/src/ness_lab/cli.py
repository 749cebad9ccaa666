"""Command-line front end.

Every command is a reproducible run: identical flags (including --seed)
produce byte-identical output files.  Results are written as CSV (default)
or JSON with floats at 17 significant digits; an optional --plot flag
renders a matplotlib figure of the same data next to the delimited output.

Exit codes: 0 success, 2 usage or parameter error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import analysis, collision, divisibility, generators, observables
from .errors import (
    ConvergenceError,
    DegenerateSteadyStateError,
    NessLabError,
    NumericalRangeError,
    ParameterError,
)
from .model import ModelParams

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    """17-significant-digit float formatting (round-trip exact)."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    return "\n".join(lines) + "\n"


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _sidecar_path(out: str, suffix: str) -> str:
    stem, _ = os.path.splitext(out)
    return f"{stem}{suffix}"


def _resolve_threads(value: int | None) -> int:
    if value is None:
        value = int(os.environ.get("NESS_LAB_THREADS", "1"))
    if value == 0:
        return os.cpu_count() or 1
    return max(1, value)


def _params_from_args(args) -> ModelParams:
    return ModelParams(z1=args.z1, z2=args.z2, gamma1=args.g1, gamma2=args.g2,
                       upsilon1=args.u1, upsilon2=args.u2, p=args.p)


def _add_model_flags(sub, couplings: bool = True):
    sub.add_argument("--z1", type=float, required=True, help="bath-1 temperature parameter in [-1, 1]")
    sub.add_argument("--z2", type=float, required=True, help="bath-2 temperature parameter in [-1, 1]")
    if couplings:
        sub.add_argument("--g1", type=float, required=True, help="system-bath coupling ratio gamma_1 > 0")
        sub.add_argument("--g2", type=float, required=True, help="system-bath coupling ratio gamma_2 > 0")
        sub.add_argument("--u1", type=float, default=0.0, help="memory-system coupling ratio upsilon_1 >= 0")
        sub.add_argument("--u2", type=float, default=0.0, help="memory-system coupling ratio upsilon_2 >= 0")
    sub.add_argument("--p", type=float, default=0.0, help="memory probability in [0, 1]")


def _add_output_flags(sub, plot: bool = True):
    sub.add_argument("--out", type=str, default=None, help="output path (default: stdout)")
    sub.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    if plot:
        sub.add_argument("--plot", type=str, default=None, help="also render a figure to this path")


# ---------------------------------------------------------------------------
# steady
# ---------------------------------------------------------------------------

def cmd_steady(args) -> int:
    params = _params_from_args(args)
    report = generators.steady_state_for(params)
    rho = report.rho_system
    if args.format == "json":
        payload = {
            "rho_re": [[float(v.real) for v in row] for row in rho],
            "rho_im": [[float(v.imag) for v in row] for row in rho],
            "concurrence": report.concurrence,
            "q_dot": report.q_dot,
            "s1": report.s1,
            "s2": report.s2,
            "residual": report.residual,
        }
        _write_text(args.out, _json_text(payload))
    else:
        rows = []
        for i in range(4):
            for j in range(4):
                rows.append((f"rho_re_{i+1}{j+1}", rho[i, j].real))
                rows.append((f"rho_im_{i+1}{j+1}", rho[i, j].imag))
        rows += [("concurrence", report.concurrence), ("q_dot", report.q_dot),
                 ("s1", report.s1), ("s2", report.s2), ("residual", report.residual)]
        _write_text(args.out, _csv(["name", "value"], rows))
    if args.plot:
        from . import plots
        plots.plot_state_matrix(rho, args.plot,
                                title=f"C={report.concurrence:.4f}, q={report.q_dot:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# cmax-map
# ---------------------------------------------------------------------------

def cmd_cmax_map(args) -> int:
    if args.grid_n < 5:
        raise ParameterError(f"--grid-n must be >= 5, got {args.grid_n}")
    z_values = np.linspace(-1.0, 1.0, args.grid_n)
    records = analysis.cmax_grid(z_values, args.p, seed=args.seed,
                                 n_starts=args.n_starts,
                                 threads=_resolve_threads(args.threads))
    header = ["z1", "z2", "c_max", "g1*", "g2*", "u1*", "u2*",
              "q_dot", "n_evaluations", "converged"]
    rows = []
    for (_, _, z1, z2, opt) in records:
        bp = opt.best_params
        rows.append((z1, z2, opt.c_max, bp.gamma1, bp.gamma2, bp.upsilon1,
                     bp.upsilon2, opt.q_dot_at_best, opt.n_evaluations,
                     opt.converged))
    if args.format == "json":
        payload = [dict(zip(header, [r[0], r[1], r[2], r[3], r[4], r[5], r[6],
                                     r[7], int(r[8]), bool(r[9])]))
                   for r in rows]
        _write_text(args.out, _json_text({"p": args.p, "seed": args.seed,
                                          "points": payload}))
    else:
        _write_text(args.out, _csv(header, rows))
    if args.plot:
        from . import plots
        grid = np.full((args.grid_n, args.grid_n), np.nan)
        for (i, j, _, _, opt) in records:
            grid[i, j] = opt.c_max
        plots.plot_cmax_map(z_values, grid, args.plot, p=args.p)
    return EXIT_OK


# ---------------------------------------------------------------------------
# cq-region
# ---------------------------------------------------------------------------

def cmd_cq_region(args) -> int:
    if args.samples < 1000:
        raise ParameterError(f"--samples must be >= 1000, got {args.samples}")
    region = analysis.sample_cq_region(args.z1, args.z2, args.p,
                                       args.samples, args.seed)
    overhang = analysis.detect_overhang(region)
    centers = (region.bin_edges[:-1] + region.bin_edges[1:]) / 2.0
    hull_payload = {
        "z1": args.z1, "z2": args.z2, "p": args.p, "seed": args.seed,
        "bin_edges": [float(v) for v in region.bin_edges],
        "hull_lower": [None if np.isnan(v) else float(v) for v in region.hull_lower],
        "hull_upper": [None if np.isnan(v) else float(v) for v in region.hull_upper],
        "bin_counts": [int(v) for v in region.bin_counts],
        "overhang": None if overhang is None else [overhang[0], overhang[1]],
    }
    header = ["q_abs", "c", "g1", "g2", "u1", "u2"]
    rows = [(q, c, g[0], g[1], g[2], g[3]) for q, c, g in region.iter_points()]
    if args.format == "json":
        payload = {"points": [dict(zip(header, r)) for r in rows], "hull": hull_payload}
        _write_text(args.out, _json_text(payload))
    else:
        _write_text(args.out, _csv(header, rows))
        sidecar = _json_text(hull_payload)
        if args.out is None:
            sys.stderr.write(sidecar)
        else:
            _write_text(_sidecar_path(args.out, "_hull.json"), sidecar)
    if args.plot:
        from . import plots
        plots.plot_cq_region(region.points_q, region.points_c, args.plot,
                             hull_centers=centers, hull_lower=region.hull_lower,
                             hull_upper=region.hull_upper, overhang=overhang,
                             label=f"z=({args.z1:g},{args.z2:g}), p={args.p:g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# divisibility
# ---------------------------------------------------------------------------

def cmd_divisibility(args) -> int:
    c_max = None
    if args.use_cmax_params:
        opt = analysis.maximize_concurrence(args.z1, args.z2, args.p, seed=args.seed)
        params = opt.best_params
        c_max = opt.c_max
    else:
        if args.g1 is None or args.g2 is None:
            raise ParameterError("either --use-cmax-params or explicit --g1/--g2 required")
        params = _params_from_args(args)
    report = divisibility.non_divisibility(params, t_max=args.tmax, n_grid=args.n_grid)
    summary = {
        "n_measure": report.n_measure,
        "converged": bool(report.converged),
        "t_max": float(report.t_grid[-1]),
        "n_points": int(report.t_grid.size),
        "params": {"z1": params.z1, "z2": params.z2, "g1": params.gamma1,
                   "g2": params.gamma2, "u1": params.upsilon1,
                   "u2": params.upsilon2, "p": params.p},
    }
    if c_max is not None:
        summary["c_max"] = c_max
    if args.format == "json":
        payload = dict(summary)
        payload["t"] = [float(v) for v in report.t_grid]
        payload["det_abs"] = [float(v) for v in report.det_abs]
        _write_text(args.out, _json_text(payload))
    else:
        _write_text(args.out, _csv(["t", "det_abs"],
                                   zip(report.t_grid, report.det_abs)))
        sidecar = _json_text(summary)
        if args.out is None:
            sys.stderr.write(sidecar)
        else:
            _write_text(_sidecar_path(args.out, "_summary.json"), sidecar)
    sys.stderr.write(f"n_measure = {report.n_measure:.17g}\n")
    if args.plot:
        from . import plots
        plots.plot_det_trajectory(report.t_grid, report.det_abs, args.plot,
                                  n_measure=report.n_measure)
    if not report.converged:
        return EXIT_NUMERICAL
    return EXIT_OK


# ---------------------------------------------------------------------------
# collide
# ---------------------------------------------------------------------------

def cmd_collide(args) -> int:
    if args.dt <= 0:
        raise ParameterError(f"--dt must be > 0, got {args.dt}")
    if args.steps < 1:
        raise ParameterError(f"--steps must be >= 1, got {args.steps}")
    params = _params_from_args(args)
    from .model import thermal_qubit
    initial = np.kron(thermal_qubit(params.z1), thermal_qubit(params.z2))
    traj = collision.simulate(initial, params, args.dt, args.steps)
    t = args.dt * np.arange(1, args.steps + 1)
    q1 = traj.cumulative_q1
    header = ["step", "t", "concurrence", "dE1", "dE2", "Q1_cumulative"]
    rows = zip(range(1, args.steps + 1), t, traj.concurrence, traj.dE1,
               traj.dE2, q1)
    if args.format == "json":
        payload = {
            "step": list(range(1, args.steps + 1)),
            "t": [float(v) for v in t],
            "concurrence": [float(v) for v in traj.concurrence],
            "dE1": [float(v) for v in traj.dE1],
            "dE2": [float(v) for v in traj.dE2],
            "Q1_cumulative": [float(v) for v in q1],
        }
        _write_text(args.out, _json_text(payload))
    else:
        _write_text(args.out, _csv(header, rows))
    if args.plot:
        from . import plots
        plots.plot_collision_trajectory(t, traj.concurrence, q1, args.plot)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ness-lab",
        description="Steady states, entanglement, heat currents and "
                    "non-divisibility of a two-qubit collision model with "
                    "tunable memory.")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("steady", help="solve one steady state and report observables")
    _add_model_flags(s)
    _add_output_flags(s)
    s.set_defaults(func=cmd_steady)

    s = sub.add_parser("cmax-map", help="maximal concurrence over a (z1, z2) grid")
    s.add_argument("--p", type=float, default=0.0, help="memory probability")
    s.add_argument("--grid-n", type=int, default=41, help="grid points per axis (>= 5)")
    s.add_argument("--seed", type=int, default=0, help="PRNG seed")
    s.add_argument("--n-starts", type=int, default=20, help="optimizer starts per grid point")
    s.add_argument("--threads", type=int, default=None,
                   help="worker processes (0 = all cores; default NESS_LAB_THREADS or 1)")
    _add_output_flags(s)
    s.set_defaults(func=cmd_cmax_map)

    s = sub.add_parser("cq-region", help="sample the (|Q_dot|, C) region")
    s.add_argument("--z1", type=float, required=True)
    s.add_argument("--z2", type=float, required=True)
    s.add_argument("--p", type=float, default=0.0)
    s.add_argument("--samples", type=int, default=10_000, help="number of coupling draws (>= 1000)")
    s.add_argument("--seed", type=int, default=0)
    _add_output_flags(s)
    s.set_defaults(func=cmd_cq_region)

    s = sub.add_parser("divisibility", help="|det F(t)| trajectory and non-divisibility measure")
    s.add_argument("--z1", type=float, required=True)
    s.add_argument("--z2", type=float, required=True)
    s.add_argument("--p", type=float, default=1.0)
    s.add_argument("--use-cmax-params", action="store_true",
                   help="optimize couplings for maximal concurrence first")
    s.add_argument("--g1", type=float, default=None)
    s.add_argument("--g2", type=float, default=None)
    s.add_argument("--u1", type=float, default=0.0)
    s.add_argument("--u2", type=float, default=0.0)
    s.add_argument("--tmax", type=float, default=None, help="time horizon (default: 50 relaxation times)")
    s.add_argument("--n-grid", type=int, default=1000, help="initial time-grid intervals")
    s.add_argument("--seed", type=int, default=0)
    _add_output_flags(s)
    s.set_defaults(func=cmd_divisibility)

    s = sub.add_parser("collide", help="run the discrete collision dynamics")
    _add_model_flags(s)
    s.add_argument("--dt", type=float, default=1e-3, help="collision duration (units 1/Omega)")
    s.add_argument("--steps", type=int, required=True, help="number of collisions")
    _add_output_flags(s)
    s.set_defaults(func=cmd_collide)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        sys.stderr.write(f"parameter error: {exc}\n")
        return EXIT_USAGE
    except (DegenerateSteadyStateError, ConvergenceError, NumericalRangeError) as exc:
        sys.stderr.write(f"numerical error: {exc}\n")
        return EXIT_NUMERICAL
    except NessLabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
