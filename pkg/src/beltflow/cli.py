"""Command-line front end: run, cfl, converge, compare, check.

Exit codes: 0 success, 1 configuration/usage problems, 2 runtime failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .congestion import lipschitz_constant
from .driver import RunConfig, advance, audit_run, compare_schemes, convergence_study
from .errors import BeltflowError, ConfigurationError
from .lxf import LxfConfig, lxf_cfl_dt
from .roe import RoeConfig, roe_cfl_dt


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="beltflow",
                     description="Finite-volume solver for non-local conveyor-belt flow")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to a key = value config file")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p_run = sub.add_parser("run", help="advance one simulation to t_end")
    common(p_run)
    p_run.add_argument("--scheme", choices=("roe", "lxf"), default=None)

    p_cfl = sub.add_parser("cfl", help="print the CFL step table for both schemes "
                                       "and both production switches")
    common(p_cfl)

    p_conv = sub.add_parser("converge", help="self-convergence study over grid levels")
    common(p_conv)
    p_conv.add_argument("--levels", default="0.04,0.02,0.01,0.005",
                        help="comma-separated dx values, each halving the previous")
    p_conv.add_argument("--scheme", choices=("roe", "lxf"), default=None)

    p_cmp = sub.add_parser("compare", help="run both schemes on identical data")
    common(p_cmp)

    p_chk = sub.add_parser("check", help="audit the invariants of a recorded run")
    p_chk.add_argument("--out", required=True, help="output directory of a finished run")
    p_chk.add_argument("--quiet", action="store_true")
    return parser


def _load_config(args) -> RunConfig:
    config = RunConfig.from_file(args.config)
    if getattr(args, "out", None):
        config = config.replace(output_dir=args.out)
    if getattr(args, "scheme", None):
        config = config.replace(scheme=args.scheme)
    return config


def _cmd_run(args) -> int:
    config = _load_config(args)
    report = advance(config)
    if not args.quiet:
        last = report.rows[-1]
        print(f"run finished: t = {last['t']:.6g}, mass = {last['mass']:.12g}, "
              f"max density = {last['linf']:.6g}")
        print(f"outputs under {report.out_dir}")
    return 0


def _cmd_cfl(args) -> int:
    config = _load_config(args)
    grid = config.build_grid()
    vfield = config.build_vfield(grid)
    rows = []
    for label, variant in (("atan", "atan"), ("polynomial", "spline")):
        model = config.replace(heaviside_kind=variant).build_model()
        L_f = lipschitz_constant(model)
        dt_roe = roe_cfl_dt(RoeConfig(epsilon=config.epsilon, cfl_mode="bv",
                                      cfl_safety=config.cfl_safety),
                            vfield, model, grid)
        dt_lxf, _, _ = lxf_cfl_dt(LxfConfig(epsilon=config.epsilon,
                                            cfl_safety=config.cfl_safety),
                                  vfield, model, grid)
        rows.append((label, L_f, grid.dx, dt_roe, dt_lxf))
    print(f"{'switch':<12} {'L_f':>8} {'dx [m]':>10} {'dt Roe [s]':>12} {'dt LxF [s]':>12}")
    for label, L_f, dx, dt_roe, dt_lxf in rows:
        print(f"{label:<12} {L_f:>8.2f} {dx:>10.3g} {dt_roe:>12.3e} {dt_lxf:>12.3e}")
    return 0


def _cmd_converge(args) -> int:
    config = _load_config(args)
    try:
        levels = [float(tok) for tok in args.levels.split(",") if tok.strip()]
    except ValueError:
        raise ConfigurationError(f"--levels must be numbers, got {args.levels!r}")
    result = convergence_study(config, levels)
    if not args.quiet:
        print(f"{'dx':>8} {'L1':>12} {'L2':>12} {'Linf':>12}")
        for i, lv in enumerate(result["levels"][:-1]):
            print(f"{lv:>8.4g} {result['errors']['l1'][i]:>12.4e} "
                  f"{result['errors']['l2'][i]:>12.4e} {result['errors']['linf'][i]:>12.4e}")
        print("empirical L1 orders:",
              " ".join(f"{o:.2f}" for o in result["orders"]["l1"]))
    return 0


def _cmd_compare(args) -> int:
    config = _load_config(args)
    rep_roe, rep_lxf = compare_schemes(config)
    if not args.quiet:
        print(f"roe: final max density {rep_roe.rows[-1]['linf']:.6g}, "
              f"outflow {rep_roe.rows[-1]['u_rho']:.6g}")
        print(f"lxf: final max density {rep_lxf.rows[-1]['linf']:.6g}, "
              f"outflow {rep_lxf.rows[-1]['u_rho']:.6g}")
        print(f"comparison series under {Path(config.output_dir) / 'compare.csv'}")
    return 0


def _cmd_check(args) -> int:
    violations = audit_run(args.out)
    if violations:
        for v in violations:
            print(f"violated: {v}", file=sys.stderr)
        return 2
    if not args.quiet:
        print("all recorded invariants hold")
    return 0


def cli_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"run": _cmd_run, "cfl": _cmd_cfl, "converge": _cmd_converge,
                "compare": _cmd_compare, "check": _cmd_check}
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (BeltflowError, RuntimeError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(cli_dispatch(sys.argv[1:]))
