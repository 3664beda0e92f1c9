"""Spin-1 single-loop sweep at several rho values, one CSV per rho.

Usage: python3 scripts/run_fig2.py --out results/ --rho 0.1 1.0
"""

import argparse
from pathlib import Path

import numpy as np

from floquet_phases import SpinSystem, run_fig2
from floquet_phases.cli import FIG2_HEADER, to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--rho", type=float, nargs="+", default=[0.1, 1.0])
    ap.add_argument("--a-max", type=float, default=4.0)
    ap.add_argument("--a-step", type=float, default=0.25)
    ap.add_argument("--steps", type=int, default=512)
    ap.add_argument("--theta", type=float, default=0.0)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    grid = np.arange(0.0, args.a_max + 1e-9, args.a_step)
    sys_ = SpinSystem(1.0, 1.0)
    for r in args.rho:
        rows = run_fig2(sys_, grid, r, steps=args.steps, theta=args.theta)
        path = args.out / f"sweep_rho{r:g}.csv"
        path.write_text(to_csv(FIG2_HEADER, [[x.a, x.gamma, *x.exact, *x.analytic, x.max_dev] for x in rows]))
        worst = max(rows, key=lambda x: x.max_dev)
        print(f"rho={r:g}: max deviation {worst.max_dev:.4g} at a={worst.a:g} -> {path}")


if __name__ == "__main__":
    main()
