"""Command line entry point ``acopt``.

Exit codes: 0 success, 1 configuration error, 2 solver failure.
``ACOPT_THREADS`` caps the BLAS/OpenMP thread pools.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .config import ConfigError, load_config
from .linalg import CGError
from .forward import NewtonError
from .scenarios import SCHEME_ALIASES, build, run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2
GRADCHECK_DIRECTIONS = 5
GRADCHECK_STEP = 1e-5
GRADCHECK_TOL = 1e-6


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="acopt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario and write CSV outputs")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument("--paper-scale", action="store_true", help="use the paper_* grid sizes")
    run.add_argument("--scheme", choices=("implicit", "semi"), default=None)
    run.add_argument("--forward-only", action="store_true", help="f = 0, no optimization")
    chk = sub.add_parser("check", help="validate a configuration")
    chk.add_argument("config", type=Path)
    grad = sub.add_parser("gradcheck", help="adjoint gradient vs central differences")
    grad.add_argument("config", type=Path)
    grad.add_argument("--paper-scale", action="store_true")
    return p


def _load(path: Path, paper_scale: bool = False):
    cfg = load_config(path)
    return cfg.at_paper_scale() if paper_scale else cfg


def _gradcheck(cfg) -> int:
    sc = build(cfg)
    problem = sc.problem()
    # fixed seed: the table is reproducible like every other output
    rng = np.random.default_rng(0)
    f = 0.5 * rng.standard_normal(problem.control_shape)
    if sc.system.vector:
        f -= f.mean(axis=1, keepdims=True)
    g = problem.gradient(f)
    h = GRADCHECK_STEP
    print(f"{'dir':>4} {'adjoint':>14} {'central fd':>14} {'rel err':>10}")
    worst = 0.0
    for k in range(GRADCHECK_DIRECTIONS):
        d = rng.standard_normal(f.shape)
        if sc.system.vector:
            d -= d.mean(axis=1, keepdims=True)
        ad = problem.inner(g, d)
        fd = (problem.objective(f + h * d) - problem.objective(f - h * d)) / (2 * h)
        err = abs(fd - ad) / max(abs(ad), 1e-300)
        worst = max(worst, err)
        print(f"{k:>4} {ad:>14.6e} {fd:>14.6e} {err:>10.2e}")
    print(f"max rel err {worst:.2e} (tolerance {GRADCHECK_TOL:.0e})")
    return EXIT_OK if worst <= GRADCHECK_TOL else EXIT_SOLVER


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = os.environ.get("ACOPT_THREADS")
    limit = None
    if threads:
        try:
            limit = int(threads)
        except ValueError:
            print(f"error: ACOPT_THREADS must be an integer, got {threads!r}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        cfg = _load(args.config, getattr(args, "paper_scale", False))
    except ConfigError as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "check":
        print(f"{args.config}: ok ({cfg.scenario}, {cfg.potential}, "
              f"{cfg.nx}x{cfg.ny}, M={cfg.M})")
        return EXIT_OK
    with threadpool_limits(limits=limit):
        try:
            if args.command == "gradcheck":
                return _gradcheck(cfg)
            out = args.out or Path("runs") / cfg.scenario
            report = run_scenario(cfg, out, forward_only=args.forward_only,
                                  scheme=SCHEME_ALIASES.get(args.scheme) if args.scheme else None)
        except (NewtonError, CGError, FloatingPointError, RuntimeError) as exc:
            print(f"error: solver failure in {cfg.scenario}: {exc}", file=sys.stderr)
            return EXIT_SOLVER
    print(f"{report.scenario}: {report.message}")
    for key, value in sorted(report.summary.items()):
        print(f"  {key} = {value}")
    print(f"  outputs in {out}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
