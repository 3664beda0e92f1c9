"""Calibrate the sweep tolerance and check its trends.

Runs the spin-1 single-loop sweep at rho = 0.1 with a fine step
(2048 per period), the same sweep at rho = 1, a theta = 1.7 repeat, and
the exact-vs-effective distance over a ladder of rho values.
"""

import argparse
import time

import numpy as np

from floquet_phases import SpinSystem, harmonic_profile, run_fig2
from floquet_phases.evolution import effective_propagator, propagate_exact
from floquet_phases.protocols import _fig2_setup


def sweep(sys, grid, rho, steps, theta=0.0):
    rows = run_fig2(sys, grid, rho, steps=steps, theta=theta)
    return np.array([r.max_dev for r in rows]), rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=2048)
    ap.add_argument("--a-conv", type=float, default=1.0, help="a used for the rho ladder")
    args = ap.parse_args()

    sys = SpinSystem(1.0, 1.0)
    grid = np.arange(0.0, 4.0 + 1e-9, 0.25)

    t = time.perf_counter()
    dev01, _ = sweep(sys, grid, 0.1, args.steps)
    print(f"rho=0.1 steps={args.steps}: max {dev01.max():.6f} at a={grid[dev01.argmax()]:.2f} "
          f"({time.perf_counter() - t:.1f}s)")
    dev01_512, _ = sweep(sys, grid, 0.1, 512)
    print(f"rho=0.1 steps=512: max {dev01_512.max():.6f}; "
          f"max |512 - {args.steps}| = {np.abs(dev01_512 - dev01).max():.2e}")
    dev1, _ = sweep(sys, grid, 1.0, 512)
    dev01_theta, _ = sweep(sys, grid, 0.1, 512, theta=1.7)
    print(" a      dev(0.1)   dev(1)     theta-shift")
    for a, d0, d1, dt in zip(grid, dev01_512, dev1, np.abs(dev01_theta - dev01_512)):
        print(f"{a:4.2f}  {d0:.6f}  {d1:.6f}  {dt:.2e}")

    prof = harmonic_profile(1.0)
    psi0 = sys.basis_state(1)
    print(f"exact vs effective final-state distance at a={args.a_conv}")
    for r in (1.0, 0.3, 0.1, 0.03):
        sched = _fig2_setup(sys, args.a_conv, r, 1.0, 5, ((0.0, 1.0, 0.0),))
        vmap = sched.spin_map(sys)
        ex = propagate_exact(vmap, prof, sched.t_start, sched.t_end).apply(psi0)
        ef = effective_propagator(vmap, prof, sched.t_start, sched.t_end).apply(psi0)
        print(f"  rho={r:<5} {np.linalg.norm(ex - ef):.3e}")


if __name__ == "__main__":
    main()
