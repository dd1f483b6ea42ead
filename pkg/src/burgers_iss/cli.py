"""Command-line interface: ``python -m burgers_iss <command> ...``.

Exit codes: 0 when every requested check passes, 1 when a check fails or a
simulation diverges, 2 for configuration errors.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import backstepping as bs
from .config import ConfigError, load_config
from .numerics import Grid1D
from .runner import (fmt, inequality_suite, run_scenario, sweep, sweep_csv,
                     write_artifacts)

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _positive_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"tolerance must be nonnegative, got {text}")
    return value


def _values(text: str) -> list[float]:
    items = [s for s in (t.strip() for t in text.split(",")) if s]
    try:
        return [float(s) for s in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="./out", help="output directory (default ./out)")
    common.add_argument("--tol", type=_positive_float, default=None,
                        help="override the tolerance of every check")
    common.add_argument("--quiet", action="store_true", help="print only failures")

    parser = argparse.ArgumentParser(
        prog="burgers_iss",
        description="Simulate disturbed Burgers and backstepping-controlled "
                    "reaction-diffusion systems and verify their ISS estimates.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run a scenario without checks")
    p.add_argument("config")
    p = sub.add_parser("verify", parents=[common], help="run a scenario and its checks")
    p.add_argument("config")
    p = sub.add_parser("kernel", parents=[common],
                       help="synthesize backstepping kernels and gain constants")
    p.add_argument("config")
    p = sub.add_parser("check-inequalities", parents=[common],
                       help="randomized functional-inequality suites")
    p.add_argument("--seeds", type=int, default=200, help="number of seeds (default 200)")
    p.add_argument("--family", choices=("trig", "sine", "all"), default="all")
    p = sub.add_parser("sweep", parents=[common], help="rerun a scenario over parameter values")
    p.add_argument("config")
    p.add_argument("--param", required=True, help="dotted config key, e.g. params.nu")
    p.add_argument("--values", required=True, type=_values, help="comma-separated values")
    return parser


def _say(args, text: str, important: bool = False) -> None:
    if important or not args.quiet:
        print(text)


def _cmd_run(args, evaluate: bool) -> int:
    config = load_config(args.config)
    art = run_scenario(config, evaluate=evaluate, tol=args.tol)
    write_artifacts(art, args.out)
    for r in art.reports:
        _say(args, r.summary(), important=not r.satisfied)
    for a in art.admissibility:
        if not a.passed:
            _say(args, f"admissibility {a.name} FAIL: {a.value:.6g} >= {a.threshold:.6g}",
                 important=True)
    for c in art.compatibility:
        if not c.passed:
            _say(args, f"compatibility {c.name} FAIL: residual {c.residual:.3e}",
                 important=True)
    if art.diverged:
        _say(args, f"DIVERGED: {art.message}", important=True)
    ok = not art.diverged if not evaluate else art.passed
    _say(args, f"{'PASS' if ok else 'FAIL'} ({art.wall_time:.2f} s, artifacts in {args.out})",
         important=not ok)
    return EXIT_OK if ok else EXIT_FAIL


def _kernel_csv(k: bs.Kernel) -> str:
    x = k.grid.x
    i, j = np.tril_indices(k.grid.n_nodes)
    lines = ["i,j,x,y,value"]
    lines += [f"{a},{b},{fmt(x[a])},{fmt(x[b])},{fmt(k.values[a, b])}" for a, b in zip(i, j)]
    return "\n".join(lines) + "\n"


def _cmd_kernel(args) -> int:
    config = load_config(args.config)
    if not config.is_reaction_diffusion:
        raise ConfigError(f"system {config.system} has no feedback kernel", "system")
    grid = Grid1D(config.n_nodes)
    params = config.rd_params
    try:
        k = bs.solve_kernel(params, grid)
        l = bs.solve_inverse_kernel(params, grid)
    except bs.KernelDivergenceError as exc:
        print(f"kernel synthesis failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    gains = bs.gain_constants(k, l)
    diag_exact = -(params.lam.integ()(grid.x)) / (2.0 * params.mu)
    diag_err = max(float(np.max(np.abs(k.diagonal - diag_exact))),
                   float(np.max(np.abs(l.diagonal - diag_exact))))
    os.makedirs(args.out, exist_ok=True)
    for name, kern in (("k", k), ("l", l)):
        with open(os.path.join(args.out, f"kernel_{name}.csv"), "w", newline="\n") as fh:
            fh.write(_kernel_csv(kern))
    rows = [("C0", gains.C0), ("C1", gains.C1), ("max_k", gains.max_k),
            ("max_l", gains.max_l), ("k11", k.values[-1, -1]),
            ("diagonal_error", diag_err)]
    with open(os.path.join(args.out, "gains.csv"), "w", newline="\n") as fh:
        fh.write("name,value\n" + "".join(f"{n},{fmt(v)}\n" for n, v in rows))
    for n, v in rows:
        _say(args, f"{n} = {v:.12g}")
    return EXIT_OK


def _cmd_inequalities(args) -> int:
    rows = inequality_suite(args.seeds, args.family)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "inequalities.csv"), "w", newline="\n") as fh:
        fh.write("check,seed,detail,margin,satisfied\n")
        for name, seed, detail, margin, ok in rows:
            fh.write(f"{name},{seed},{detail},{fmt(margin)},{str(ok).lower()}\n")
    failed = 0
    for name in sorted({r[0] for r in rows}):
        sel = [r for r in rows if r[0] == name]
        bad = [r for r in sel if not r[4]]
        failed += len(bad)
        worst = min(r[3] for r in sel)
        _say(args, f"{name}: {len(sel) - len(bad)}/{len(sel)} satisfied, "
                   f"worst margin {worst:.6g}", important=bool(bad))
    return EXIT_OK if failed == 0 else EXIT_FAIL


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    rows = sweep(config, args.param, args.values, tol=args.tol)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "sweep.csv"), "w", newline="\n") as fh:
        fh.write(sweep_csv(args.param, rows))
    for r in rows:
        margins = ", ".join(f"{n}={m:.4g}" for n, m in sorted(r.min_margins.items()))
        adm = ", ".join(f"{a[0]} {a[1]:.4g}/{a[2]:.4g}" for a in r.admissibility)
        text = f"{args.param}={r.value:g}: {'pass' if r.passed else 'FAIL'}"
        for part in (margins, adm, r.error):
            if part:
                text += f"; {part}"
        _say(args, text, important=not r.passed)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_run(args, evaluate=False)
        if args.command == "verify":
            return _cmd_run(args, evaluate=True)
        if args.command == "kernel":
            return _cmd_kernel(args)
        if args.command == "check-inequalities":
            return _cmd_inequalities(args)
        return _cmd_sweep(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
