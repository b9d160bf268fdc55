"""Keep-circle: TRN against Armijo steepest descent, measured in PDE solves.

Writes both convergence logs as CSV (same columns) for residual-vs-cost plots.
"""
import argparse
from pathlib import Path

from acopt.experiments import load_named, trn_vs_gradient
from acopt.io import write_history
from acopt.scenarios import build


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--budget-factor", type=float, default=3.0,
                    help="gradient-method budget as a multiple of the TRN solve count")
    ap.add_argument("--out", type=Path, default=Path("runs/trn_vs_gradient"))
    args = ap.parse_args()
    sc = build(load_named("keep_circle"))
    cmp = trn_vs_gradient(sc.problem, args.tol, args.budget_factor)
    write_history(cmp.trn_history, args.out / "trn_history.csv")
    write_history(cmp.gd_history, args.out / "gd_history.csv")
    print(f"TRN: {cmp.trn_solves} solves, |grad| = {cmp.trn_grad_norm:.2e}, "
          f"converged = {cmp.trn_converged}")
    print(f"gradient method: {cmp.gd_solves} solves, |grad| = {cmp.gd_grad_norm:.2e}, "
          f"converged = {cmp.gd_converged}")


if __name__ == "__main__":
    main()
