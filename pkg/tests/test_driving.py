import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import cumulative_trapezoid

from floquet_phases.driving import (
    DrivingProfile,
    fourier_coeff,
    harmonic_profile,
    load_profile,
    p_factor,
    phase_grid,
    primitive,
    profile_from_function,
    tabulated_profile,
)


def square(x):
    # value 0 at the jumps keeps the sampled wave exactly zero-mean
    x = np.asarray(x)
    r = np.mod(x, np.pi)
    at_jump = np.isclose(r, 0.0, atol=1e-12) | np.isclose(r, np.pi, atol=1e-12)
    return np.where(at_jump, 0.0, np.sign(np.sin(x)))


def triangle(x):
    # zero-mean primitive of the square wave
    x = np.mod(x, 2 * np.pi)
    return np.where(x <= np.pi, x - np.pi / 2, 3 * np.pi / 2 - x)


def test_harmonic_defaults():
    prof = harmonic_profile(2.0)
    assert prof.coeff(1) == pytest.approx(0.5, abs=1e-15)
    assert prof.coeff(-1) == pytest.approx(0.5, abs=1e-15)
    assert abs(prof.coeff(0)) < 1e-15
    assert prof.p == 0.5
    assert prof.period == pytest.approx(np.pi)


def test_square_wave_primitive_against_trapezoid():
    M = 2048
    x = phase_grid(M)
    F = primitive(square, M)
    xs = np.append(x, 2 * np.pi)
    oracle = cumulative_trapezoid(square(xs), xs, initial=0.0)[:-1]
    oracle -= oracle.mean()
    assert np.max(np.abs(F - oracle)) < 5e-3
    assert np.max(np.abs(F - triangle(x))) < 5e-3


def test_triangle_p_factor():
    A = 1.7
    M = 1024
    p = p_factor(lambda x: A * triangle(x) / (np.pi / 2), M)
    assert p == pytest.approx(A**2 / 3, rel=1e-5)


def test_parseval():
    M = 256
    f = lambda x: np.exp(np.cos(x)) - np.mean(np.exp(np.cos(phase_grid(4096))))
    power = np.mean(f(phase_grid(M)) ** 2)
    spectrum = sum(abs(fourier_coeff(f, m, M)) ** 2 for m in range(-M // 4, M // 4 + 1))
    assert spectrum == pytest.approx(power, rel=1e-12)


@given(st.integers(1, 20), st.floats(-2, 2), st.floats(0, 2 * np.pi))
@settings(max_examples=40, deadline=None)
def test_primitive_of_single_harmonic(k, amp, shift):
    M = 128
    x = phase_grid(M)
    F = primitive(amp * np.cos(k * x + shift), M)
    assert np.max(np.abs(F - amp * np.sin(k * x + shift) / k)) < 1e-12


def test_primitive_rejects_mean():
    with pytest.raises(ValueError, match="zero mean"):
        primitive(lambda x: 1.0 + np.cos(x), 64)


def test_undersampled_coefficient():
    with pytest.raises(ValueError):
        fourier_coeff(np.cos, 40, 128)


def test_tabulated_cosine_matches_harmonic(rng):
    tab = profile_from_function(np.cos, 1.3, theta=0.4)
    har = harmonic_profile(1.3, theta=0.4)
    x = rng.uniform(0, 2 * np.pi, 50)
    assert np.max(np.abs(tab.f(x) - har.f(x))) < 1e-12
    assert np.max(np.abs(tab.primitive(x) - har.primitive(x))) < 1e-12
    assert tab.p == pytest.approx(0.5, abs=1e-12)


def test_tabulated_mean_is_recorded():
    prof = tabulated_profile(0.25 + np.cos(phase_grid(64)), 1.0)
    assert prof.mean_correction == pytest.approx(0.25)
    assert abs(np.mean(prof.samples)) < 1e-15


def test_profile_validation():
    with pytest.raises(ValueError):
        DrivingProfile(0.0)
    with pytest.raises(ValueError):
        DrivingProfile(1.0, theta=np.nan)
    with pytest.raises(ValueError):
        tabulated_profile(np.cos(phase_grid(32)), 1.0)


def test_load_profile_round_trip(tmp_path):
    x = phase_grid(128)
    path = tmp_path / "drive.txt"
    np.savetxt(path, np.column_stack([x, np.cos(x) + 0.5 * np.cos(2 * x)]))
    prof = load_profile(path, 1.0)
    assert np.max(np.abs(prof.f(x) - (np.cos(x) + 0.5 * np.cos(2 * x)))) < 1e-12


def test_load_profile_shifted_grid(tmp_path):
    x = 0.3 + phase_grid(128)
    path = tmp_path / "drive.txt"
    np.savetxt(path, np.column_stack([x, np.cos(x)]))
    prof = load_profile(path, 1.0)
    y = np.linspace(0, 6, 17)
    assert np.max(np.abs(prof.f(y) - np.cos(y))) < 1e-10


def test_load_profile_bad_grid(tmp_path):
    path = tmp_path / "drive.txt"
    x = np.sort(np.random.default_rng(0).uniform(0, 2 * np.pi, 100))
    np.savetxt(path, np.column_stack([x, np.cos(x)]))
    with pytest.raises(ValueError, match="uniform"):
        load_profile(path, 1.0)
