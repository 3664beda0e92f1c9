import numpy as np
import pytest

from floquet_phases import (
    FieldSchedule,
    NumericalGuardError,
    RampUp,
    RotateLoop,
    SpinSystem,
    effective_propagator,
    evolve_state,
    full_solution,
    harmonic_profile,
    holonomy_loop,
    micromotion_s,
    omega_spin,
    propagate_effective,
    propagate_exact,
    propagate_transformed,
)
from floquet_phases.protocols import E_X, E_Y, E_Z, build_fig2_schedule
from floquet_phases.smallmat import dist, unitarity_defect, unitary_exp
from floquet_phases.transform import linear_spin_map

T = 2 * np.pi


def loop_schedule(a, Omega, axis=E_Y, profile="plateau"):
    return FieldSchedule((RampUp(5 * T, a, E_Z), RotateLoop(axis, Omega, 1.0, a, profile)))


def test_static_field_is_periodic():
    # a constant V under f = cos returns to the identity after every period
    s = SpinSystem(1, 1.0)
    vmap = linear_spin_map(s, [0.3, 0.4, 1.2], [0.0, 0.0, 0.0])
    prof = harmonic_profile(1.0, theta=0.7)
    U = propagate_exact(vmap, prof, 0.0, 3 * T).U
    assert dist(U, np.eye(3)) < 1e-12
    assert dist(propagate_exact(vmap, prof, 0.0, 0.5 * T).U, np.eye(3)) > 0.1


def test_static_field_closed_form():
    s = SpinSystem(0.5, 1.0)
    B = np.array([0.0, 0.0, 2.0])
    vmap = linear_spin_map(s, B, [0.0, 0.0, 0.0])
    prof = harmonic_profile(1.0, theta=0.3)
    t1 = 2.2
    # exp(-i V int_0^t1 cos(t + theta) dt)
    integral = np.sin(t1 + 0.3) - np.sin(0.3)
    expected = unitary_exp(2.0 * s.Fz, integral)
    assert dist(propagate_exact(vmap, prof, 0.0, t1, 2048).U, expected) < 1e-6


def test_composition_on_shared_grid():
    s = SpinSystem(1, 1.0)
    sched = loop_schedule(1.5, 0.1)
    vmap = sched.spin_map(s)
    prof = harmonic_profile(1.0)
    U01 = propagate_exact(vmap, prof, 0.0, 8 * T).U
    U12 = propagate_exact(vmap, prof, 8 * T, 13 * T).U
    U02 = propagate_exact(vmap, prof, 0.0, 13 * T).U
    assert dist(U12 @ U01, U02) < 1e-8


def test_step_halving_is_second_order():
    s = SpinSystem(1, 1.0)
    sched = loop_schedule(2.0, 0.2)
    vmap = sched.spin_map(s)
    prof = harmonic_profile(1.0, theta=0.4)
    t1 = sched.t_end
    U = {n: propagate_exact(vmap, prof, 0.0, t1, n).U for n in (128, 256, 512)}
    e1 = dist(U[128], U[256])
    e2 = dist(U[256], U[512])
    assert 3.0 < e1 / e2 < 5.0
    # the change on doubling is within 4x the Richardson estimate e2/3
    assert e2 <= 4 * e1 / 3


def test_unitarity_and_state_norm():
    s = SpinSystem(1.5, 1.0)
    sched = build_fig2_schedule(2.0, 2.0, 0.3, 1.0, f_F=1.5)
    vmap = sched.spin_map(s)
    prof = harmonic_profile(1.0)
    res = propagate_exact(vmap, prof, sched.t_start, sched.t_end)
    assert res.unitarity_defect <= 1e-8
    times, states = evolve_state(vmap, prof, s.basis_state(0.5), sched.t_start, sched.t_end, 512, 97)
    assert times[0] == sched.t_start and times[-1] == sched.t_end
    assert np.max(np.abs(np.linalg.norm(states, axis=1) - 1)) < 1e-10
    assert dist(states[-1], res.apply(s.basis_state(0.5))) < 1e-10


def test_generator_round_trip():
    s = SpinSystem(1, 1.0)
    sched = loop_schedule(1.0, 0.2)
    res = propagate_exact(sched.spin_map(s), harmonic_profile(1.0), 0.0, 20.0)
    assert dist(unitary_exp(res.generator(), -1.0), res.U) < 1e-10


def test_omega_dt_guard_precedes_step_check():
    s = SpinSystem(0.5)
    vmap = linear_spin_map(s, [0, 0, 1.0], [0, 0, 0])
    prof = harmonic_profile(1.0)
    with pytest.raises(NumericalGuardError):
        propagate_exact(vmap, prof, 0.0, 1.0, 31)
    with pytest.raises(ValueError):
        propagate_exact(vmap, prof, 0.0, 1.0, 40)


def test_phase_spread_guard():
    s = SpinSystem(1, 1.0)
    vmap = linear_spin_map(s, [0, 0, 50.0], [0, 0, 0])
    with pytest.raises(NumericalGuardError, match="eigenphase"):
        propagate_exact(vmap, harmonic_profile(1.0), 0.0, T, 64)


def test_reversed_interval_rejected():
    s = SpinSystem(0.5)
    vmap = linear_spin_map(s, [0, 0, 1.0], [0, 0, 0])
    with pytest.raises(ValueError):
        propagate_exact(vmap, harmonic_profile(1.0), 1.0, 0.0)


def test_transformed_frame_reproduces_exact():
    s = SpinSystem(1, 1.0)
    sched = loop_schedule(2.0, 0.2)
    vmap = sched.spin_map(s)
    prof = harmonic_profile(1.0, theta=1.1)
    t0, t1 = 3 * T + 0.4, sched.t_end - 0.3
    exact = propagate_exact(vmap, prof, t0, t1, 4096).U
    for n in (512, 1024):
        assert dist(full_solution(vmap, prof, t0, t1, n, use_effective=False).U, exact) < 1e-5


def test_effective_loop_matches_closed_form_holonomy():
    s = SpinSystem(1, 1.0)
    prof = harmonic_profile(1.0)
    for a in (0.7, 2.0, 3.83):
        sched = loop_schedule(a, 0.05)
        p = sched.pieces[1]
        U = effective_propagator(sched.spin_map(s), prof, p.t0, p.t1).U
        assert dist(U, holonomy_loop(s, np.array(E_Y), a).U) < 1e-6


def test_geometric_invariance_across_profiles():
    # profiles whose rate has zero end-slope, so the midpoint rule is exact to
    # leading order (the cubic profile leaves a ~1e-5 quadrature error at 256 steps)
    s = SpinSystem(0.5, 1.0)
    prof = harmonic_profile(1.0)
    Us = []
    for Om, shape in ((0.2, "smootherstep"), (0.05, "plateau"), (0.1, "linear")):
        sched = loop_schedule(1.3, Om, E_X, shape)
        p = sched.pieces[1]
        Us.append(effective_propagator(sched.spin_map(s), prof, p.t0, p.t1).U)
    assert dist(Us[0], Us[1]) < 1e-6
    assert dist(Us[0], Us[2]) < 1e-6


def test_effective_approaches_exact_as_loop_slows():
    s = SpinSystem(1, 1.0)
    prof = harmonic_profile(1.0)
    errs = []
    for Om in (0.2, 0.05):
        sched = loop_schedule(1.5, Om)
        vmap = sched.spin_map(s)
        p = sched.pieces[1]
        # loop starts and ends on whole periods with theta = 0, so S vanishes there
        errs.append(dist(propagate_exact(vmap, prof, p.t0, p.t1).U,
                         full_solution(vmap, prof, p.t0, p.t1).U))
    assert errs[1] < errs[0] / 3


def test_propagate_effective_minimum_steps():
    with pytest.raises(ValueError):
        propagate_effective(lambda t: np.zeros((2, 2)), 0.0, 1.0, 10)


def test_propagate_transformed_unitary():
    s = SpinSystem(1.5, 1.0)
    sched = loop_schedule(1.0, 0.3)
    res = propagate_transformed(sched.spin_map(s), harmonic_profile(1.0), 0.0, sched.t_end)
    assert unitarity_defect(res.U) < 1e-8


def test_micromotion_vanishes_at_zero_field():
    s = SpinSystem(1)
    prof = harmonic_profile(1.0)
    assert np.linalg.norm(micromotion_s(s, [0, 0, 0], prof, 1.3)) == 0.0
    S = micromotion_s(s, [0, 0, 2.0], prof, np.pi / 2)
    assert dist(S, 2.0 * s.Fz) < 1e-15


def test_omega_spin_values():
    assert omega_spin(1.0, 0.0) == 0.0
    assert omega_spin(2.0, 2.405) == pytest.approx(2.0, abs=1e-3)
    assert omega_spin(1.0, 0.2) == pytest.approx(0.01, rel=0.01)


def test_holonomy_properties():
    for f in (0.5, 1.0, 1.5, 2.0):
        s = SpinSystem(f)
        U = holonomy_loop(s, np.array([0.6, 0.0, 0.8]), 1.7).U
        assert unitarity_defect(U) < 1e-12
        assert abs(np.linalg.det(U) - 1) < 1e-12
        assert dist(holonomy_loop(s, np.array(E_X), 0.0).U, np.eye(s.dim)) < 1e-14
    with pytest.raises(ValueError):
        holonomy_loop(SpinSystem(1), np.array([1.0, 1.0, 0.0]), 1.0)


def test_loops_do_not_commute():
    s = SpinSystem(0.5)
    Ux = holonomy_loop(s, np.array(E_X), 2.0).U
    Uy = holonomy_loop(s, np.array(E_Y), 2.0).U
    assert np.linalg.norm(Ux @ Uy - Uy @ Ux) > 0.1
