"""Command line interface.

Subcommands: evolve, validate, symbol, field, rt-check.  Exit codes:
0 success, 2 configuration error, 3 solver failure, 4 RT-floor halt,
5 validation failure.  The worker thread count is read from MUSKAT_THREADS;
outputs are bit-identical for any value.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys

import numpy as np

from . import __version__
from ._parallel import thread_count
from .config import ConfigError, SimConfig, parse_config
from .dynamics import evolve
from .fields import ProbePoint, eval_pressure, eval_velocity
from .grid import load_field, make_field, save_field
from .multipliers import MultiplierSpec, symbol_D
from .potentials import InterfaceGeometry
from .profiles import phibar
from .resolvent import SolveFailure
from .validate import CSV_HEADER, run_validate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_RT = 4
EXIT_VALIDATION = 5


def _initial_field(cfg: SimConfig) -> ScalarField:
    kind = cfg.initial_kind
    if kind == "zero":
        return make_field(cfg.grid, "zero")
    if kind == "mode":
        return make_field(cfg.grid, "mode", amplitude=cfg.initial["amplitude"],
                          k=cfg.initial["k"])
    if kind == "gaussian":
        return make_field(cfg.grid, "gaussian_bump",
                          amplitude=cfg.initial["amplitude"],
                          center=cfg.initial["center"], width=cfg.initial["width"])
    try:
        snap = load_field(cfg.initial["path"])
    except (OSError, ValueError) as exc:
        raise ConfigError(f"initial.path: cannot load snapshot: {exc}") from exc
    if snap.grid != cfg.grid:
        raise ConfigError(
            f"snapshot grid {snap.grid} does not match config grid {cfg.grid}")
    return snap


def _write_manifest(cfg: SimConfig, outdir, extra=None):
    manifest = {
        "config": cfg.echo,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "seed": cfg.seed,
        "grid": {"dim": cfg.grid.dim, "extent": cfg.grid.extent,
                 "points": cfg.grid.points, "spacing": cfg.grid.spacing},
        "thread_count": thread_count(),
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_evolve(args) -> int:
    cfg = parse_config(args.config)
    outdir = args.output or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    f0 = _initial_field(cfg)
    try:
        result = evolve(f0, cfg.params, cfg.stepper, solver_tol=cfg.solver_tol,
                        sobolev_s=cfg.sobolev_s)
    except SolveFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    with open(os.path.join(outdir, "series.csv"), "w") as fh:
        fh.write(result.SERIES_HEADER + "\n")
        for row in result.series:
            fh.write(",".join(repr(v) for v in row) + "\n")
    for index, snap in result.snapshots:
        save_field(os.path.join(outdir, f"snapshot_{index:06d}.bin"), snap)
    save_field(os.path.join(outdir, "final.bin"), result.final.f)
    _write_manifest(cfg, outdir, {"halted": result.halted,
                                  "steps": len(result.series) - 1})
    if result.halted == "rt-floor":
        print(f"halted: RT margin fell below floor {cfg.stepper.rt_floor} "
              f"at t={result.final.t:.6f}; outputs in {outdir}", file=sys.stderr)
        return EXIT_RT
    print(f"evolved to t={result.final.t:.6f} in {len(result.series) - 1} steps; "
          f"outputs in {outdir}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = parse_config(args.config)
    outdir = args.output or cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    selection = args.suite if args.suite else (cfg.suites or "all")
    try:
        rows, ok = run_validate(cfg, selection)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    with open(os.path.join(outdir, "validate_report.csv"), "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(r.csv() + "\n")
    _write_manifest(cfg, outdir, {"validate_passed": ok})
    for r in rows:
        print(r.line())
    print(f"{sum(r.passed for r in rows)}/{len(rows)} checks passed; "
          f"report in {outdir}/validate_report.csv")
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_symbol(args) -> int:
    A = tuple(float(v) for v in args.A.split(","))
    nu = tuple(int(v) for v in args.nu.split(","))
    dim = len(nu)
    if len(A) != dim:
        raise ConfigError("--A and --nu must have equal length")
    try:
        mspec = MultiplierSpec(phibar(dim), args.n, nu, A)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    ray = np.asarray([float(v) for v in args.ray.split(",")])
    if ray.shape != (dim,) or not np.any(ray):
        raise ConfigError("--ray must be a nonzero direction of the same dimension")
    ray = ray / np.linalg.norm(ray)
    rows = []
    for i in range(1, args.num + 1):
        z = ray * (args.zmax * i / args.num)
        s = symbol_D(mspec, z)
        rows.append(list(z) + [s.real, s.imag])
    out = args.out or "symbol.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"z{j}" for j in range(dim)] + ["re_symbol", "im_symbol"])
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
    print(f"wrote {len(rows)} symbol samples to {out}")
    return EXIT_OK


def cmd_field(args) -> int:
    cfg = parse_config(args.config)
    f = _initial_field(cfg)
    geom = InterfaceGeometry(f)
    from .resolvent import solve_beta
    beta, _ = solve_beta(geom, cfg.params.a_mu, tol=cfg.solver_tol)
    probes = []
    with open(args.probes, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = [f"x{j}" for j in range(cfg.grid.dim)] + ["y"]
        if [h.strip() for h in header] != expected:
            raise ConfigError(f"probe CSV must have columns {expected}, got {header}")
        for line in reader:
            vals = [float(v) for v in line]
            probes.append(ProbePoint.locate(geom, vals[:-1], vals[-1]))
    vs = eval_velocity(geom, beta, probes)
    qs = eval_pressure(geom, beta, probes)
    out = args.out or "field.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["probe"]
                        + [f"v{j}" for j in range(cfg.grid.dim + 1)]
                        + ["q", "side"])
        for i, (v, q, p) in enumerate(zip(vs, qs, probes)):
            writer.writerow([i] + [repr(float(c)) for c in v]
                            + [repr(float(q)), p.side])
    print(f"wrote {len(probes)} probes to {out}")
    return EXIT_OK


def cmd_rt_check(args) -> int:
    cfg = parse_config(args.config)
    f = load_field(args.snapshot)
    from .dynamics import InterfaceState, rt_margin
    try:
        state = InterfaceState.compute(f, cfg.params, tol=cfg.solver_tol)
    except SolveFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _, mn, holds = rt_margin(state, cfg.params)
    print(f"min RT margin: {mn!r}; condition holds: {holds}")
    return EXIT_OK if holds else EXIT_RT


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="muskat",
        description="Boundary-integral engine for the gravity-driven Muskat "
                    "interface evolution")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run a time evolution")
    p.add_argument("config")
    p.add_argument("--output", help="override output.dir")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("validate", help="run identity validation suites")
    p.add_argument("config")
    p.add_argument("--suite", help="single suite name (default: config selection)")
    p.add_argument("--output", help="override output.dir")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("symbol", help="dump multiplier symbol samples along a ray")
    p.add_argument("--A", required=True, help="frozen gradient, comma separated")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--nu", required=True, help="multi-index, comma separated")
    p.add_argument("--ray", required=True, help="frequency direction, comma separated")
    p.add_argument("--num", type=int, default=32)
    p.add_argument("--zmax", type=float, default=8.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_symbol)

    p = sub.add_parser("field", help="evaluate velocity/pressure at probes")
    p.add_argument("config")
    p.add_argument("--probes", required=True, help="CSV with columns x0..,y")
    p.add_argument("--out")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("rt-check", help="Rayleigh-Taylor margin of a snapshot")
    p.add_argument("config")
    p.add_argument("--snapshot", required=True)
    p.set_defaults(func=cmd_rt_check)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolveFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
