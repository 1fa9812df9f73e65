"""Command-line entry point: ``annulus-euler {solve,verify,converge,compare}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .config import load_config, parse_grid_spec
from .errors import AnnulusEulerError, ConfigError, GateViolation, Mismatch, NoConvergence
from .fields import PolarVectorField
from .verify import (
    convergence_study,
    euler_residual,
    exact_solution_for,
    residual_norm,
    rotational_residual,
    run,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_MISMATCH = 4
EXIT_GATE = 5
ROUND_TRIP_TOL = 1e-12


def build_parser():
    parser = argparse.ArgumentParser(
        prog="annulus-euler",
        description="Steady Euler flows in an annulus with through-flow boundary data.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML run configuration")
    common.add_argument("--out", help="output directory (overrides [output].dir)")
    common.add_argument("--grid", help="grid as NRxNT, e.g. 65x128")
    common.add_argument("--method", choices=["grad_shafranov", "vortex_transport", "both"])
    common.add_argument("--quiet", action="store_true", help="print nothing on success")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve and emit fields and report")
    sub.add_parser("verify", parents=[common], help="solve, then recheck residuals from the emitted files")
    conv = sub.add_parser("converge", parents=[common], help="convergence study over nested grids")
    conv.add_argument("--levels", default="32,64,128", help="radial cell counts, comma separated")
    sub.add_parser("compare", parents=[common], help="solve by both routes and report the gaps")
    return parser


def _load(args):
    cfg = load_config(args.config)
    if args.grid:
        cfg = cfg.with_grid(*parse_grid_spec(args.grid))
    if args.method:
        cfg = cfg.with_method(args.method)
    if args.command == "compare":
        cfg = cfg.with_method("both")
    return cfg


def _out_dir(args, cfg):
    return Path(args.out or cfg.output_dir or "out")


def _say(args, text):
    if not args.quiet:
        print(text)


def _emit(args, cfg, sols):
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    prefixed = len(sols) > 1
    for method, sol in sols.items():
        prefix = f"{method}_" if prefixed else ""
        if cfg.write_fields:
            io.write_solution(out, sol, prefix)
        io.write_report(out / f"{prefix}report.json", sol.report)
    return out


def _summary(sol):
    rep = sol.report
    parts = [
        f"{sol.method}: converged={rep.converged}",
        f"iterations={rep.iterations}",
        f"euler_residual={rep.euler_residual_inf:.3e}",
    ]
    if rep.Rave_final is not None:
        parts.append(f"Rave={rep.Rave_final:.3e}")
    if rep.compat_gap is not None:
        parts.append(f"compat_gap={rep.compat_gap:.3e}")
    gap = rep.diagnostics.get("cross_method_gap_u")
    if gap is not None:
        parts.append(f"cross_gap_u={gap:.3e} cross_gap_p={rep.diagnostics['cross_method_gap_p']:.3e}")
    return " ".join(parts)


def _compat_status(sols):
    for sol in sols.values():
        if sol.report.diagnostics.get("compat_ok") is False:
            return sol.report.compat_gap
    return None


def cmd_solve(args, cfg):
    sols = run(cfg)
    out = _emit(args, cfg, sols)
    for sol in sols.values():
        _say(args, _summary(sol))
    gap = _compat_status(sols)
    if gap is not None:
        print(f"compatibility mismatch: gap {gap:.3e} (reports in {out})", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def _round_trip(out, prefix, report):
    """Recompute residuals from the emitted fields and compare with the report."""
    ur = io.read_field(out / f"{prefix}u_r.csv")
    ut = io.read_field(out / f"{prefix}u_theta.csv")
    p = io.read_field(out / f"{prefix}p.csv")
    u = PolarVectorField(ur.grid, ur.values, ut.values)
    rot = residual_norm(rotational_residual(u, p))
    adv = residual_norm(euler_residual(u, p))
    return max(
        abs(rot - report.euler_residual_inf),
        abs(adv - report.diagnostics["euler_residual_advective"]),
    )


def cmd_verify(args, cfg):
    if not cfg.write_fields:
        raise ConfigError("verify needs [output].fields = true")
    sols = run(cfg)
    oracle = exact_solution_for(cfg)
    for sol in sols.values():
        if oracle is not None:
            u_ex, p_ex = oracle(cfg.grid)
            sol.report.diagnostics["oracle_u_error"] = float((sol.u - u_ex).max_abs())
            diff = sol.p.values - p_ex.values
            sol.report.diagnostics["oracle_p_error"] = float(0.5 * (diff.max() - diff.min()))
    out = _emit(args, cfg, sols)
    status = EXIT_OK
    for method, sol in sols.items():
        prefix = f"{method}_" if len(sols) > 1 else ""
        drift = _round_trip(out, prefix, sol.report)
        sol.report.diagnostics["round_trip_drift"] = drift
        io.write_report(out / f"{prefix}report.json", sol.report)
        _say(args, _summary(sol) + f" round_trip_drift={drift:.1e}")
        if drift > ROUND_TRIP_TOL:
            print(f"{method}: emitted fields do not reproduce the report", file=sys.stderr)
            status = EXIT_ERROR
    gap = _compat_status(sols)
    if gap is not None:
        print(f"compatibility mismatch: gap {gap:.3e}", file=sys.stderr)
        return EXIT_MISMATCH
    return status


def cmd_converge(args, cfg):
    try:
        levels = [int(x) for x in args.levels.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--levels must be integers, got {args.levels!r}") from None
    try:
        table = convergence_study(cfg, levels)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    (out / "convergence.json").write_text(json.dumps(table, indent=2, sort_keys=True) + "\n")
    if not args.quiet:
        print(f"{'nr':>5} {'ntheta':>6} {'dr':>10} {'u_error':>11} {'p_error':>11} {'residual':>11}")
        for row in table["rows"]:
            print(
                f"{row['nr']:>5} {row['ntheta']:>6} {row['dr']:>10.3e} {row['u_error']:>11.3e}"
                f" {row['p_error']:>11.3e} {row['euler_residual']:>11.3e}"
            )
        fmt = lambda v: "n/a" if v is None else f"{v:.2f}"
        print("order: " + " ".join(f"{k}={fmt(v)}" for k, v in table["order"].items()))
    return EXIT_OK


def cmd_compare(args, cfg):
    sols = run(cfg)
    _emit(args, cfg, sols)
    gs = sols["grad_shafranov"].report.diagnostics
    _say(args, f"cross_method_gap_u={gs['cross_method_gap_u']:.3e} cross_method_gap_p={gs['cross_method_gap_p']:.3e}")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "converge": cmd_converge, "compare": cmd_compare}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.report is not None and "cfg" in locals():
            out = _out_dir(args, cfg)
            out.mkdir(parents=True, exist_ok=True)
            io.write_report(out / "report.json", exc.report)
        return EXIT_NO_CONVERGENCE
    except Mismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except GateViolation as exc:
        print(f"gate violation: {exc}", file=sys.stderr)
        return EXIT_GATE
    except AnnulusEulerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
