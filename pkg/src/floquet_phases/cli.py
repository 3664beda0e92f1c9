"""Command-line entry point: ``floquet-phases {evolve,fig2,holonomy,wcheck,echo}``.

Exit codes: 0 success, 2 configuration error, 3 numerical guard tripped,
4 I/O error. CSV output uses 17 significant digits and ``\\n`` line endings.
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, HolonomyConfig, WCheckConfig, dump_config, load_config
from .driving import DrivingProfile, harmonic_profile, load_profile
from .evolution import NumericalGuardError, evolve_state, holonomy_loop
from .protocols import run_fig2
from .spin import SpinSystem
from .transform import adiabaticity_check, fourier_provider, w_oracle_triangle

logger = logging.getLogger("floquet_phases")

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_IO = 0, 2, 3, 4

FIG2_HEADER = ("a", "gamma", "p1_exact", "p0_exact", "pm1_exact",
               "p1_analytic", "p0_analytic", "pm1_analytic", "max_dev")
WCHECK_HEADER = ("spin", "a_max", "series_order", "draws",
                 "d_numeric_series", "d_numeric_closed", "d_series_closed")
ADIABATIC_MODES = (-2, -1, 1, 2)


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def m_label(m: float) -> str:
    """Column label for ``m_F``: ``1``, ``0``, ``m1``, ``1_2``, ``m3_2``..."""
    q = Fraction(m).limit_denominator(2)
    body = str(abs(q.numerator)) if q.denominator == 1 else f"{abs(q.numerator)}_{q.denominator}"
    return ("m" if q < 0 else "") + body


def _profile(cfg: ExperimentConfig) -> DrivingProfile:
    if cfg.drive == "harmonic":
        return harmonic_profile(cfg.omega, cfg.theta)
    try:
        return load_profile(cfg.drive, cfg.omega, cfg.theta)
    except ValueError as exc:
        raise ConfigError(f"drive file: {exc}") from None


def _system(cfg: ExperimentConfig) -> SpinSystem:
    return SpinSystem(cfg.spin, cfg.g_factor)


def cmd_evolve(cfg: ExperimentConfig) -> str:
    """Time series of the state along the configured schedule."""
    if not cfg.segments:
        raise ConfigError("evolve needs at least one [segment.N] section")
    sys_ = _system(cfg)
    profile = _profile(cfg)
    sched = cfg.schedule()
    vmap = sched.spin_map(sys_)
    m0 = sys_.f_F if cfg.initial_m is None else cfg.initial_m
    psi0 = sys_.basis_state(m0)
    every = cfg.sample_every or cfg.steps_per_period
    times, states = evolve_state(vmap, profile, psi0, sched.t_start, sched.t_end,
                                 cfg.steps_per_period, every)
    labels = [m_label(m) for m in sys_.m_values]
    header = ["t"]
    q = set(cfg.quantities)
    if "amplitudes" in q:
        for lab in labels:
            header += [f"re_{lab}", f"im_{lab}"]
    if "probabilities" in q:
        header += [f"p_{lab}" for lab in labels]
    if "B_norm" in q:
        header.append("B_norm")
    if "adiabaticity" in q:
        header.append("adiabaticity")
        provider = fourier_provider(vmap, profile, cfg.phase_grid)
    Bn = np.linalg.norm(sched.B(times), axis=-1)
    rows = []
    for t, psi, b in zip(times, states, Bn):
        row = [t]
        if "amplitudes" in q:
            for z in psi:
                row += [z.real, z.imag]
        if "probabilities" in q:
            row += list(np.abs(psi) ** 2)
        if "B_norm" in q:
            row.append(b)
        if "adiabaticity" in q:
            row.append(adiabaticity_check(provider, t, ADIABATIC_MODES, profile.omega))
        rows.append(row)
    return to_csv(header, rows)


def cmd_fig2(cfg: ExperimentConfig) -> str:
    """Exact vs closed-form spin-1 populations over the configured ``a`` grid."""
    if cfg.fig2 is None:
        raise ConfigError("fig2 needs a [fig2] section")
    if abs(cfg.spin - 1.0) > 1e-12:
        raise ConfigError(f"fig2 is defined for spin 1, got spin {cfg.spin:g}")
    if cfg.g_factor <= 0:
        raise ConfigError(f"fig2 needs g_factor > 0, got {cfg.g_factor:g}")
    if cfg.drive != "harmonic":
        raise ConfigError("fig2 compares with closed forms that assume the harmonic drive")
    f2 = cfg.fig2
    rows = run_fig2(_system(cfg), f2.a_grid, f2.rho, steps=cfg.steps_per_period, omega=cfg.omega,
                    theta=cfg.theta, ramp_periods=f2.ramp_periods)
    return to_csv(FIG2_HEADER, [[r.a, r.gamma, *r.exact, *r.analytic, r.max_dev] for r in rows])


def cmd_holonomy(cfg: ExperimentConfig) -> str:
    """Loop unitaries ``exp(-i gamma F.n)`` and pairwise commutator norms."""
    h = cfg.holonomy or HolonomyConfig()
    sys_ = _system(cfg)
    d = sys_.dim
    ops = []
    for i, ax in enumerate(h.axes):
        n = np.asarray(ax, dtype=float)
        norm = np.linalg.norm(n)
        if norm == 0:
            raise ConfigError(f"holonomy axis {i} is zero")
        if abs(norm - 1.0) > 1e-12:
            logger.warning("holonomy axis %d has norm %.6g; normalizing", i, norm)
            n = n / norm
        ops.append(holonomy_loop(sys_, n, h.a))
    header = ["record", "index_a", "index_b", "nx", "ny", "nz", "gamma", "comm_norm"]
    for r in range(d):
        for c in range(d):
            header += [f"U_re_{r}{c}", f"U_im_{r}{c}"] if d <= 10 else [f"U_re_{r}_{c}", f"U_im_{r}_{c}"]
    blank = [None] * (2 * d * d)
    rows = []
    for i, op in enumerate(ops):
        flat = []
        for z in op.U.ravel():
            flat += [z.real, z.imag]
        rows.append(["loop", i, None, *op.axis, op.gamma, None, *flat])
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            C = ops[i].U @ ops[j].U - ops[j].U @ ops[i].U
            rows.append(["commutator", i, j, None, None, None, None, np.linalg.norm(C), *blank])
    return to_csv(header, rows)


def cmd_wcheck(cfg: ExperimentConfig, seed: int = 0) -> str:
    """Oracle triangle on seeded random draws, one row per (spin, a_max)."""
    w = cfg.wcheck or WCheckConfig()
    rng = np.random.default_rng(seed)
    profile = harmonic_profile(cfg.omega, cfg.theta)
    rows = []
    for s in w.spins:
        for a_max in w.a_max:
            rep = w_oracle_triangle(SpinSystem(s, cfg.g_factor), w.draws, a_max, rng, profile, w.series_order)
            rows.append([rep.f_F, rep.a_max, rep.series_order, rep.draws,
                         rep.d_numeric_series, rep.d_numeric_closed, rep.d_series_closed])
    return to_csv(WCHECK_HEADER, rows)


def cmd_echo(cfg: ExperimentConfig) -> str:
    return dump_config(cfg)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="floquet-phases", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [("evolve", "state time series along the configured schedule"),
                        ("fig2", "exact vs closed-form spin-1 populations over an a grid"),
                        ("holonomy", "loop unitaries and commutator norms"),
                        ("wcheck", "compare the three W routes on random draws"),
                        ("echo", "re-emit the normalized configuration")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path, required=name not in ("wcheck", "holonomy"))
        p.add_argument("--out", type=Path, help="output file (default: [output] path, else stdout)")
        p.add_argument("--steps", type=int, help="override steps_per_period")
        p.add_argument("--seed", type=int, default=0, help="seed for random oracle draws")
        p.add_argument("--theta", type=float, help="override the drive phase offset")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.steps is not None and args.steps < 64:
            raise ConfigError(f"--steps must be >= 64, got {args.steps}")
        if args.theta is not None and not np.isfinite(args.theta):
            raise ConfigError("--theta must be finite")
        cfg = cfg.with_overrides(steps_per_period=args.steps, theta=args.theta)
        if args.command == "evolve":
            text = cmd_evolve(cfg)
        elif args.command == "fig2":
            text = cmd_fig2(cfg)
        elif args.command == "holonomy":
            text = cmd_holonomy(cfg)
        elif args.command == "wcheck":
            text = cmd_wcheck(cfg, args.seed)
        else:
            text = cmd_echo(cfg)
        out = args.out or (Path(cfg.output_path) if cfg.output_path and args.command != "echo" else None)
        if out is None:
            sys.stdout.write(text)
        else:
            with open(out, "w", newline="\n") as fh:
                fh.write(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run())
