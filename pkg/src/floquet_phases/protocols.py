"""Slow field schedules ``B(t)`` and the ramp / loop / ramp measurement protocol.

A :class:`FieldSchedule` is a sequence of segments laid end to end. Each
segment picks up the field left by the previous one:

* :class:`RampUp` and :class:`RampDown` change ``|B|`` along a fixed
  direction, so ``B x Bdot = 0`` and the effective Hamiltonian vanishes;
* :class:`RotateLoop` turns ``B`` about an axis at constant ``|B|``;
* :class:`Hold` keeps ``B`` fixed.

Ramps use a cubic smoothstep. Loops turn at a constant rate in the middle
80% and accelerate on quintic-smoothed edges, which keeps ``Bdot``
continuous at every joint while holding the peak rate to 1.25 Omega.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .constants import STEPS_PER_PERIOD
from .driving import DrivingProfile, harmonic_profile
from .evolution import NumericalGuardError, PropagatorResult, holonomy_loop, propagate_exact
from .smallmat import dist
from .spin import SpinSystem
from .transform import VOperatorMap, bessel_j0, spin_map

E_X = (1.0, 0.0, 0.0)
E_Y = (0.0, 1.0, 0.0)
E_Z = (0.0, 0.0, 1.0)

# ramp guard on g_F f_F |Bdot| / omega^2
RAMP_GUARD = 0.2
# fraction of a loop spent on each accelerating edge of the plateau profile
PLATEAU_EDGE = 0.2


class ScheduleError(ValueError):
    """Invalid schedule; ``index`` names the offending segment (0-based)."""

    def __init__(self, index: int, message: str):
        self.index = index
        super().__init__(f"segment {index}: {message}")


def _shape(name: str, x):
    """Profile value and derivative on ``x`` in [0, 1]."""
    x = np.clip(x, 0.0, 1.0)
    if name == "smoothstep":
        return x * x * (3 - 2 * x), 6 * x * (1 - x)
    if name == "smootherstep":
        return x**3 * (10 - 15 * x + 6 * x * x), 30 * x * x * (1 - x) ** 2
    if name == "linear":
        return x, np.ones_like(x)
    if name == "plateau":
        w = PLATEAU_EDGE
        u1 = np.clip(x / w, 0.0, 1.0)
        u2 = np.clip((1 - x) / w, 0.0, 1.0)
        # edge rate is smootherstep(u); its integral is 2.5u^4 - 3u^5 + u^6
        Q1 = u1**4 * (2.5 - 3 * u1 + u1 * u1)
        Q2 = u2**4 * (2.5 - 3 * u2 + u2 * u2)
        val = np.where(x < w, w * Q1, np.where(x <= 1 - w, w / 2 + (x - w), (1 - w) - w * Q2))
        rate = np.where(x < w, u1**3 * (10 - 15 * u1 + 6 * u1 * u1),
                        np.where(x <= 1 - w, 1.0, u2**3 * (10 - 15 * u2 + 6 * u2 * u2)))
        return val / (1 - w), rate / (1 - w)
    raise ValueError(f"unknown profile shape {name!r}")


def _unit(v, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if v.shape != (3,) or not np.isfinite(n) or n == 0:
        raise ValueError(f"{what} must be a nonzero finite 3-vector, got {v}")
    return v / n


@dataclass(frozen=True)
class RampUp:
    duration: float
    B0: float
    direction: tuple = E_Z
    shape: str = "smoothstep"
    start: float | None = None


@dataclass(frozen=True)
class RampDown:
    duration: float
    shape: str = "smoothstep"
    start: float | None = None


@dataclass(frozen=True)
class RotateLoop:
    """Rotation about ``axis`` (right-hand rule) with mean angular rate ``Omega``."""

    axis: tuple
    Omega: float
    cycles: float = 1.0
    B0: float | None = None
    profile: str = "plateau"
    start: float | None = None

    @property
    def duration(self) -> float:
        return 2 * np.pi * self.cycles / self.Omega


@dataclass(frozen=True)
class Hold:
    duration: float
    start: float | None = None


Segment = Union[RampUp, RampDown, RotateLoop, Hold]


@dataclass(frozen=True)
class _Piece:
    seg: Segment
    t0: float
    t1: float
    B_in: np.ndarray
    B_out: np.ndarray
    axis: np.ndarray | None = None


def _rotate(v, axis, phi):
    """Rodrigues rotation of ``v`` (shape ``(3,)``) by angles ``phi`` (any shape)."""
    phi = np.asarray(phi, dtype=float)[..., None]
    c, s = np.cos(phi), np.sin(phi)
    return v * c + np.cross(axis, v) * s + axis * (axis @ v) * (1 - c)


@dataclass(frozen=True)
class FieldSchedule:
    """Piecewise field path starting at ``t0`` from zero field."""

    segments: tuple
    t0: float = 0.0
    pieces: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("schedule needs at least one segment")
        t = float(self.t0)
        B = np.zeros(3)
        pieces = []
        for i, seg in enumerate(segs):
            if seg.start is not None:
                if seg.start < t - 1e-9 * max(1.0, abs(t)):
                    raise ScheduleError(i, f"overlaps previous segment (starts at {seg.start:g}, previous ends at {t:g})")
                if seg.start > t + 1e-9 * max(1.0, abs(t)):
                    raise ScheduleError(i, f"leaves a gap after previous segment (starts at {seg.start:g}, previous ends at {t:g})")
            try:
                piece = self._place(seg, t, B)
            except ScheduleError:
                raise
            except ValueError as exc:
                raise ScheduleError(i, str(exc)) from None
            pieces.append(piece)
            t, B = piece.t1, piece.B_out
        object.__setattr__(self, "pieces", tuple(pieces))

    @staticmethod
    def _place(seg, t, B_in) -> _Piece:
        dur = seg.duration
        if not (np.isfinite(dur) and dur > 0):
            raise ValueError(f"duration must be positive, got {dur}")
        if isinstance(seg, RampUp):
            _shape(seg.shape, 0.0)
            target = seg.B0 * _unit(seg.direction, "ramp direction")
            if np.linalg.norm(np.cross(B_in, target)) > 1e-12 * max(1.0, np.linalg.norm(B_in) * abs(seg.B0)):
                raise ValueError("ramp would change the field direction")
            return _Piece(seg, t, t + dur, B_in, target)
        if isinstance(seg, RampDown):
            _shape(seg.shape, 0.0)
            return _Piece(seg, t, t + dur, B_in, np.zeros(3))
        if isinstance(seg, RotateLoop):
            _shape(seg.profile, 0.0)
            if not (np.isfinite(seg.Omega) and seg.Omega > 0):
                raise ValueError(f"loop frequency must be positive, got {seg.Omega}")
            n = _unit(seg.axis, "loop axis")
            Bn = np.linalg.norm(B_in)
            if Bn == 0:
                raise ValueError("cannot rotate a zero field")
            if seg.B0 is not None and abs(seg.B0 - Bn) > 1e-9 * max(1.0, Bn):
                raise ValueError(f"loop radius {seg.B0:g} differs from incoming |B| = {Bn:g}")
            B_out = _rotate(B_in, n, np.mod(2 * np.pi * seg.cycles, 2 * np.pi))
            return _Piece(seg, t, t + dur, B_in, B_out, n)
        if isinstance(seg, Hold):
            return _Piece(seg, t, t + dur, B_in, B_in)
        raise TypeError(f"unknown segment type {type(seg).__name__}")

    @property
    def t_start(self) -> float:
        return self.pieces[0].t0

    @property
    def t_end(self) -> float:
        return self.pieces[-1].t1

    @property
    def boundaries(self) -> tuple[float, ...]:
        return tuple(p.t0 for p in self.pieces) + (self.t_end,)

    @property
    def joints(self) -> tuple[float, ...]:
        return tuple(p.t0 for p in self.pieces[1:])

    def _eval(self, t, want_dot: bool):
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t)
        out = np.zeros(flat.shape + (3,))
        if not want_dot:
            out[flat < self.t_start] = self.pieces[0].B_in
            out[flat >= self.t_end] = self.pieces[-1].B_out
        last = len(self.pieces) - 1
        for i, p in enumerate(self.pieces):
            m = (flat >= p.t0) & ((flat < p.t1) | ((i == last) & (flat == p.t1)))
            if not np.any(m):
                continue
            dur = p.t1 - p.t0
            x = (flat[m] - p.t0) / dur
            seg = p.seg
            if isinstance(seg, (RampUp, RampDown)):
                s, ds = _shape(seg.shape, x)
                delta = p.B_out - p.B_in
                out[m] = np.outer(ds / dur, delta) if want_dot else p.B_in + np.outer(s, delta)
            elif isinstance(seg, RotateLoop):
                s, ds = _shape(seg.profile, x)
                total = 2 * np.pi * seg.cycles
                B = _rotate(p.B_in, p.axis, total * s)
                out[m] = (total * ds / dur)[:, None] * np.cross(p.axis, B) if want_dot else B
            else:
                out[m] = 0.0 if want_dot else p.B_in
        return out if t.ndim else out[0]

    def B(self, t) -> np.ndarray:
        return self._eval(t, False)

    def Bdot(self, t) -> np.ndarray:
        return self._eval(t, True)

    def is_measurement(self, atol: float = 0.0) -> bool:
        """True when the field vanishes at both ends (no micromotion at the endpoints)."""
        return (np.linalg.norm(self.B(self.t_start)) <= atol
                and np.linalg.norm(self.B(self.t_end)) <= atol)

    def joint_jumps(self) -> list[tuple[float, float]]:
        """``(|B| jump, |Bdot| jump)`` at each internal joint."""
        out = []
        for a, b in zip(self.pieces[:-1], self.pieces[1:]):
            tj = b.t0
            left_B = a.B_out
            right_B = self.B(tj)
            left_d = self._piece_dot(a, 1.0)
            right_d = self._piece_dot(b, 0.0)
            out.append((float(np.linalg.norm(left_B - right_B)), float(np.linalg.norm(left_d - right_d))))
        return out

    def _piece_dot(self, p: _Piece, x: float) -> np.ndarray:
        dur = p.t1 - p.t0
        seg = p.seg
        if isinstance(seg, (RampUp, RampDown)):
            _, ds = _shape(seg.shape, x)
            return ds / dur * (p.B_out - p.B_in)
        if isinstance(seg, RotateLoop):
            s, ds = _shape(seg.profile, x)
            total = 2 * np.pi * seg.cycles
            return total * ds / dur * np.cross(p.axis, _rotate(p.B_in, p.axis, total * s))
        return np.zeros(3)

    def max_ramp_rate(self) -> float:
        """Largest ``|Bdot|`` reached on any ramp segment."""
        rates = [0.0]
        for p in self.pieces:
            if isinstance(p.seg, (RampUp, RampDown)):
                x = np.linspace(0, 1, 201)
                _, ds = _shape(p.seg.shape, x)
                rates.append(float(np.max(ds)) / (p.t1 - p.t0) * float(np.linalg.norm(p.B_out - p.B_in)))
        return max(rates)

    def spin_map(self, sys: SpinSystem) -> VOperatorMap:
        return spin_map(sys, self.B, self.Bdot, breakpoints=self.joints)


def rho(Omega: float, g_F: float, B0: float, omega: float) -> float:
    """Adiabaticity ratio ``Omega g_F B0 / omega^2``."""
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    return Omega * g_F * B0 / omega**2


def build_fig2_schedule(B0: float, a: float, rho: float, omega: float, ramp_periods: int = 5,
                        f_F: float = 1.0, axes: Sequence = (E_Y,),
                        loop_profile: str = "plateau", align: bool = True) -> FieldSchedule:
    """Ramp up along ``e_z`` to ``B0``, one loop per axis, ramp down.

    With ``align`` a hold is inserted after the loops so that the ramp down
    begins a whole number of drive periods after the ramp up began. A cubic
    ramp spanning whole periods then leaves no residual ``F_z`` phase at
    ``theta = 0``; holds and ramps are diagonal along ``e_z`` and do not
    change the populations.

    ``a = g_F B0 / omega`` fixes ``g_F``; the loop frequency is
    ``Omega = rho omega^2 / (g_F B0) = rho omega / a``, so each loop lasts
    ``a / rho`` drive periods. For ``a = 0`` the loops have zero length and
    are left out.

    Raises:
        NumericalGuardError: if the ramps violate ``g_F f_F |Bdot| / omega < 0.2 omega``.
    """
    if ramp_periods < 1:
        raise ValueError(f"ramp_periods must be >= 1, got {ramp_periods}")
    if a < 0 or B0 < 0:
        raise ValueError("a and B0 must be non-negative")
    if a > 0 and B0 == 0:
        raise ValueError("a > 0 needs a nonzero field amplitude")
    if a > 0 and rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    T = 2 * np.pi / omega
    tau = ramp_periods * T
    # peak smoothstep rate 1.5 B0 / tau and g_F B0 = a omega
    ratio = f_F * 1.5 * a / (tau * omega)
    if ratio >= RAMP_GUARD:
        raise NumericalGuardError(
            f"ramp too fast: g_F f_F |Bdot|/omega^2 = {ratio:.3f} >= {RAMP_GUARD}; use more ramp periods"
        )
    segs: list[Segment] = [RampUp(tau, B0, E_Z)]
    if a > 0:
        Omega = rho * omega / a
        for ax in axes:
            n = _unit(ax, "loop axis")
            if abs(n[2]) > 1e-12:
                raise ValueError(f"loop axis {tuple(ax)} must be orthogonal to e_z")
            segs.append(RotateLoop(tuple(n), Omega, 1.0, B0, loop_profile))
        if align:
            # start the ramp down on a whole drive period so its residual phase cancels
            pad = -sum(s.duration for s in segs[1:]) % T
            if pad > 1e-9 * T and T - pad > 1e-9 * T:
                segs.append(Hold(pad))
    segs.append(RampDown(tau))
    return FieldSchedule(tuple(segs))


def analytic_probabilities(gamma: float) -> np.ndarray:
    """Spin-1 populations of ``m_F = (1, 0, -1)`` after ``exp(-i gamma F_y)`` on ``|+1>``."""
    return np.array([np.cos(gamma / 2) ** 4, np.sin(gamma) ** 2 / 2, np.sin(gamma / 2) ** 4])


@dataclass(frozen=True)
class Fig2Row:
    a: float
    gamma: float
    exact: np.ndarray
    analytic: np.ndarray

    @property
    def deviation(self) -> np.ndarray:
        return np.abs(self.exact - self.analytic)

    @property
    def max_dev(self) -> float:
        return float(np.max(self.deviation))


def _fig2_setup(sys: SpinSystem, a: float, rho_: float, omega: float, ramp_periods: int, axes):
    if not sys.g_F > 0:
        raise ValueError(f"the sweep needs g_F > 0, got {sys.g_F}")
    return build_fig2_schedule(a * omega / sys.g_F, a, rho_, omega, ramp_periods, sys.f_F, axes)


def run_fig2(sys: SpinSystem, a_grid: Sequence[float], rho: float, steps: int = STEPS_PER_PERIOD,
             omega: float = 1.0, theta: float = 0.0, ramp_periods: int = 5,
             profile: DrivingProfile | None = None) -> list[Fig2Row]:
    """Exact vs closed-form populations after one ``e_y`` loop, for each ``a``.

    Starts in ``m_F = +1`` (spin 1); rows are in ``a_grid`` order.
    """
    if abs(sys.f_F - 1.0) > 1e-12:
        raise ValueError("the measurement sweep is defined for spin 1")
    profile = profile or harmonic_profile(omega, theta)
    if not profile.is_harmonic:
        raise ValueError("closed-form populations assume the harmonic drive")
    psi0 = sys.basis_state(1)
    rows = []
    for a in a_grid:
        sched = _fig2_setup(sys, float(a), rho, profile.omega, ramp_periods, (E_Y,))
        res = propagate_exact(sched.spin_map(sys), profile, sched.t_start, sched.t_end, steps)
        p = np.abs(res.apply(psi0)) ** 2
        if abs(p.sum() - 1.0) > 1e-8:
            raise NumericalGuardError(f"populations sum to {p.sum():.12f} at a = {a}")
        gamma = 2 * np.pi * (1.0 - bessel_j0(a))
        rows.append(Fig2Row(float(a), gamma, p, analytic_probabilities(gamma)))
    return rows


def holonomy_product(sys: SpinSystem, axes: Sequence, a: float) -> np.ndarray:
    """``U^(n_k) ... U^(n_1)`` for loops taken in the order of ``axes``."""
    U = np.eye(sys.dim, dtype=complex)
    for ax in axes:
        U = holonomy_loop(sys, _unit(ax, "loop axis"), a).U @ U
    return U


@dataclass(frozen=True)
class DoubleLoopResult:
    exact: PropagatorResult
    closed_form: np.ndarray
    schedule: FieldSchedule

    @property
    def distance(self) -> float:
        return dist(self.exact.U, self.closed_form)


def run_double_loop(sys: SpinSystem, a: float, rho: float, order: Sequence = (E_Y, E_X),
                    steps: int = STEPS_PER_PERIOD, omega: float = 1.0, theta: float = 0.0,
                    ramp_periods: int = 5) -> DoubleLoopResult:
    """Ramp up, loop about ``order[0]``, loop about ``order[1]``, ramp down.

    The exact propagator is compared with ``U^(order[1]) U^(order[0])``.
    """
    if len(order) != 2:
        raise ValueError("order must name two axes")
    profile = harmonic_profile(omega, theta)
    sched = _fig2_setup(sys, a, rho, omega, ramp_periods, order)
    res = propagate_exact(sched.spin_map(sys), profile, sched.t_start, sched.t_end, steps)
    return DoubleLoopResult(res, holonomy_product(sys, order, a), sched)
