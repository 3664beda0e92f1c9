"""Time-ordered propagation, adiabatic effective propagator and loop holonomies.

All propagators use midpoint-exponential stepping: the interval is cut into
uniform steps and each step contributes ``exp(-i H(t_mid) dt)``, which is
second-order accurate and exactly unitary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import (
    EFFECTIVE_STEPS,
    MAX_OMEGA_DT,
    MAX_PHASE_PER_STEP,
    PHASE_GRID,
    STEPS_PER_PERIOD,
    TOL,
)
from .driving import DrivingProfile
from .smallmat import log_unitary, ordered_product, unitarity_defect, unitary_exp
from .spin import SpinSystem, zeeman_v
from .transform import (
    VOperatorMap,
    bessel_j0,
    effective_hamiltonian,
    transformed_along,
)


class NumericalGuardError(RuntimeError):
    """A step-size or accuracy guard was tripped."""


@dataclass(frozen=True)
class PropagatorResult:
    U: np.ndarray
    t0: float
    t1: float
    steps_used: int
    unitarity_defect: float
    adiabaticity_max: float | None = None

    def apply(self, psi) -> np.ndarray:
        return self.U @ np.asarray(psi, dtype=complex)

    def generator(self) -> np.ndarray:
        """Hermitian ``G`` with ``U = exp(i G)``, eigenphases in ``(-pi, pi]``."""
        return log_unitary(self.U)


@dataclass(frozen=True)
class HolonomyOperator:
    axis: np.ndarray
    gamma: float
    U: np.ndarray


def _grid(t0: float, t1: float, dt_max: float) -> tuple[np.ndarray, float]:
    if t1 < t0:
        raise ValueError(f"t1 = {t1} precedes t0 = {t0}")
    n = max(1, int(np.ceil((t1 - t0) / dt_max - 1e-9)))
    dt = (t1 - t0) / n
    mids = t0 + (np.arange(n) + 0.5) * dt
    return mids, dt


def _result(Us: np.ndarray, t0: float, t1: float, d: int) -> PropagatorResult:
    U = ordered_product(Us) if len(Us) else np.eye(d, dtype=complex)
    defect = unitarity_defect(U)
    if defect > TOL.propagator_unitarity:
        raise NumericalGuardError(f"propagator lost unitarity: defect {defect:.2e}")
    return PropagatorResult(U, float(t0), float(t1), len(Us), defect)


def exact_step_unitaries(vmap: VOperatorMap, profile: DrivingProfile, t0: float, t1: float,
                         steps_per_period: int = STEPS_PER_PERIOD) -> tuple[np.ndarray, np.ndarray]:
    """Per-step unitaries of the original-frame Hamiltonian and the step edge times."""
    dt_max = profile.period / steps_per_period
    if profile.omega * dt_max >= MAX_OMEGA_DT:
        raise NumericalGuardError(
            f"omega*dt = {profile.omega * dt_max:.3f} >= {MAX_OMEGA_DT}; increase steps_per_period"
        )
    if steps_per_period < 64:
        raise ValueError(f"steps_per_period must be >= 64, got {steps_per_period}")
    mids, dt = _grid(t0, t1, dt_max)
    H = vmap.v_many(mids) * profile.f(profile.phase(mids))[:, None, None]
    # Frobenius norm bounds the spectral radius
    spread = 2 * dt * np.linalg.norm(H, axis=(-2, -1))
    if np.max(spread) > MAX_PHASE_PER_STEP:
        raise NumericalGuardError(
            f"eigenphase spread {np.max(spread):.3f} per step exceeds {MAX_PHASE_PER_STEP}; "
            "increase steps_per_period"
        )
    edges = t0 + np.arange(len(mids) + 1) * dt
    edges[-1] = t1
    return unitary_exp(H, dt), edges


def propagate_exact(vmap: VOperatorMap, profile: DrivingProfile, t0: float, t1: float,
                    steps_per_period: int = STEPS_PER_PERIOD) -> PropagatorResult:
    """Time-ordered propagator of ``H(t) = V(lambda(t)) f(omega t + theta)``."""
    Us, _ = exact_step_unitaries(vmap, profile, t0, t1, steps_per_period)
    return _result(Us, t0, t1, vmap.v_at(t0).shape[-1])


def evolve_state(vmap: VOperatorMap, profile: DrivingProfile, psi0, t0: float, t1: float,
                 steps_per_period: int = STEPS_PER_PERIOD, sample_every: int | None = None):
    """Exact state trajectory; returns ``(times, states)`` sampled every ``sample_every`` steps.

    The initial and final times are always included.
    """
    Us, edges = exact_step_unitaries(vmap, profile, t0, t1, steps_per_period)
    sample_every = sample_every or steps_per_period
    psi = np.asarray(psi0, dtype=complex)
    times, states = [edges[0]], [psi]
    for k, U in enumerate(Us, start=1):
        psi = U @ psi
        if k % sample_every == 0 or k == len(Us):
            times.append(edges[k])
            states.append(psi)
    return np.array(times), np.array(states)


def propagate_effective(w0, t0: float, t1: float, steps: int = EFFECTIVE_STEPS) -> PropagatorResult:
    """Time-ordered exponential of ``W^(0)`` on ``steps`` uniform midpoint steps.

    ``w0`` maps a time to the effective Hamiltonian.
    """
    if steps < 64:
        raise ValueError(f"steps must be >= 64, got {steps}")
    if t1 < t0:
        raise ValueError(f"t1 = {t1} precedes t0 = {t0}")
    dt = (t1 - t0) / steps
    mids = t0 + (np.arange(steps) + 0.5) * dt
    H = np.stack([w0(t) for t in mids])
    return _result(unitary_exp(H, dt), t0, t1, H.shape[-1])


def _pieces(vmap: VOperatorMap, t0: float, t1: float) -> list[tuple[float, float]]:
    cuts = [t0] + [b for b in vmap.breakpoints if t0 < b < t1] + [t1]
    return [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]


def effective_propagator(vmap: VOperatorMap, profile: DrivingProfile, t0: float, t1: float,
                         steps_per_segment: int = EFFECTIVE_STEPS,
                         phase_grid: int = PHASE_GRID) -> PropagatorResult:
    """``U_eff(0)(t1, t0)`` with one block of ``steps_per_segment`` steps per smooth piece."""
    w0 = effective_hamiltonian(vmap, profile, phase_grid)
    d = vmap.v_at(t0).shape[-1]
    U = np.eye(d, dtype=complex)
    n = 0
    for a, b in _pieces(vmap, t0, t1):
        r = propagate_effective(w0, a, b, steps_per_segment)
        U = r.U @ U
        n += r.steps_used
    return PropagatorResult(U, float(t0), float(t1), n, unitarity_defect(U))


def propagate_transformed(vmap: VOperatorMap, profile: DrivingProfile, t0: float, t1: float,
                          steps_per_period: int = STEPS_PER_PERIOD) -> PropagatorResult:
    """Exact propagator of the transformed-frame Hamiltonian ``W(omega t + theta, t)``."""
    if steps_per_period < 64:
        raise ValueError(f"steps_per_period must be >= 64, got {steps_per_period}")
    mids, dt = _grid(t0, t1, profile.period / steps_per_period)
    H = transformed_along(vmap, profile, mids)
    return _result(unitary_exp(H, dt), t0, t1, H.shape[-1])


def micromotion(V, profile: DrivingProfile, phase) -> np.ndarray:
    """``S = F(theta') V / omega``."""
    return profile.c(phase) * np.asarray(V)


def micromotion_s(sys: SpinSystem, B, profile: DrivingProfile, phase) -> np.ndarray:
    """Spin micromotion ``S = (F(theta')/omega) g_F F.B``."""
    return micromotion(zeeman_v(sys, B), profile, phase)


def full_solution(vmap: VOperatorMap, profile: DrivingProfile, t0: float, t1: float,
                  steps: int | None = None, use_effective: bool = True,
                  phase_grid: int = PHASE_GRID) -> PropagatorResult:
    """Original-frame propagator ``exp(-i S(t1)) U_body exp(i S(t0))``.

    ``U_body`` is the adiabatic ``U_eff(0)`` when ``use_effective`` is set
    (``steps`` per smooth piece) and otherwise the exact transformed-frame
    propagator (``steps`` per drive period).
    """
    if use_effective:
        body = effective_propagator(vmap, profile, t0, t1, steps or EFFECTIVE_STEPS, phase_grid)
    else:
        body = propagate_transformed(vmap, profile, t0, t1, steps or STEPS_PER_PERIOD)
    S0 = micromotion(vmap.v_at(t0), profile, profile.phase(t0))
    S1 = micromotion(vmap.v_at(t1), profile, profile.phase(t1))
    U = unitary_exp(S1, 1.0) @ body.U @ unitary_exp(S0, -1.0)
    return PropagatorResult(U, float(t0), float(t1), body.steps_used, unitarity_defect(U))


def omega_spin(Omega: float, a: float) -> float:
    """Spin rotation frequency ``Omega [1 - J0(a)]``."""
    return Omega * (1.0 - bessel_j0(a))


def holonomy_loop(sys: SpinSystem, axis, a: float) -> HolonomyOperator:
    """Loop unitary ``exp(-i gamma F.n)`` with ``gamma = 2 pi [1 - J0(a)]``."""
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"axis must be a unit vector, |n| = {norm}")
    gamma = 2 * np.pi * (1.0 - bessel_j0(a))
    return HolonomyOperator(n, gamma, unitary_exp(sys.dot(n), gamma))
