"""Tabulate Omega_spin / Omega = 1 - J0(a) and locate its first maximum."""

import argparse

import numpy as np
from scipy.optimize import minimize_scalar

from floquet_phases import bessel_j0
from floquet_phases.cli import to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--a-max", type=float, default=10.0)
    ap.add_argument("--points", type=int, default=201)
    ap.add_argument("--out", default=None, help="CSV path (default: stdout summary only)")
    args = ap.parse_args()

    a = np.linspace(0.0, args.a_max, args.points)
    ratio = 1.0 - bessel_j0(a)
    best = minimize_scalar(lambda x: bessel_j0(x), bounds=(3.0, 4.5), method="bounded",
                           options={"xatol": 1e-10})
    first_zero = minimize_scalar(lambda x: abs(bessel_j0(x)), bounds=(2.0, 3.0), method="bounded",
                                 options={"xatol": 1e-12})
    print(f"J0 first zero: a = {first_zero.x:.6f}")
    print(f"max Omega_spin/Omega = {1 - best.fun:.6f} at a = {best.x:.6f}")
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(to_csv(("a", "omega_spin_ratio"), zip(a, ratio)))


if __name__ == "__main__":
    main()
