"""Periodic drive ``f(theta')``, its zero-mean primitive and Fourier machinery.

A drive is either the harmonic ``f = cos`` (evaluated analytically) or a
table of samples on a uniform grid over one period. Tabulated drives are
evaluated between grid points by trigonometric interpolation, and their
primitive is obtained by spectral integration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .constants import PHASE_GRID, TOL

logger = logging.getLogger(__name__)

PeriodicInput = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def phase_grid(M: int = PHASE_GRID) -> np.ndarray:
    """Uniform grid ``2 pi j / M`` on ``[0, 2 pi)``."""
    if M < 1:
        raise ValueError(f"grid size must be positive, got {M}")
    return 2 * np.pi * np.arange(M) / M


def _samples(g: PeriodicInput, M: int | None) -> np.ndarray:
    if callable(g):
        return np.asarray(g(phase_grid(M or PHASE_GRID)))
    g = np.asarray(g)
    if M is not None and g.shape[0] != M:
        raise ValueError(f"expected {M} samples, got {g.shape[0]}")
    return g


def fourier_coeff(g: PeriodicInput, m: int, M: int = PHASE_GRID) -> complex:
    """``(1/2pi) int g(x) exp(-i m x) dx`` by the uniform trapezoid rule.

    ``g`` is a callable or an array of ``M`` samples on :func:`phase_grid`.
    """
    if M < 4 * abs(m):
        raise ValueError(f"grid of {M} points undersamples harmonic m = {m} (need M >= {4 * abs(m)})")
    vals = _samples(g, M)
    return complex(np.mean(vals * np.exp(-1j * m * phase_grid(M))))


def primitive(f: PeriodicInput, M: int = PHASE_GRID) -> np.ndarray:
    """Zero-mean antiderivative of a zero-mean periodic function, on the grid.

    Fourier coefficients are divided by ``i m``; the Nyquist mode (even ``M``)
    is dropped since its primitive vanishes on the grid.

    Raises:
        ValueError: if ``f`` has nonzero mean.
    """
    vals = np.asarray(_samples(f, M), dtype=float)
    mean = float(np.mean(vals))
    scale = max(1.0, float(np.max(np.abs(vals))))
    if abs(mean) > TOL.zero_mean * scale:
        raise ValueError(f"drive must have zero mean, got mean {mean:.3e}")
    n = vals.shape[0]
    c = np.fft.rfft(vals)
    k = np.arange(c.shape[0])
    out = np.zeros_like(c)
    out[1:] = c[1:] / (1j * k[1:])
    if n % 2 == 0:
        out[-1] = 0.0
    return np.fft.irfft(out, n=n)


def p_factor(F: PeriodicInput, M: int = PHASE_GRID) -> float:
    """Period average of ``F(x)^2``."""
    vals = np.asarray(_samples(F, M), dtype=float)
    return float(np.mean(vals**2))


def _trig_eval(coeffs: np.ndarray, n: int, x) -> np.ndarray:
    """Evaluate the real trigonometric interpolant with rfft coefficients ``coeffs``."""
    x = np.asarray(x, dtype=float)
    c = coeffs / n
    k = np.arange(c.shape[0])
    weight = np.full(c.shape[0], 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    e = np.exp(1j * np.multiply.outer(x, k))
    return np.real(e @ (weight * c))


@dataclass(frozen=True)
class DrivingProfile:
    """Periodic drive of angular frequency ``omega`` and phase offset ``theta``.

    ``samples`` is ``None`` for the harmonic drive; otherwise it holds the
    zero-mean values of ``f`` on a uniform grid.
    """

    omega: float
    theta: float = 0.0
    samples: np.ndarray | None = field(default=None, repr=False, compare=False)
    mean_correction: float = 0.0
    _coeffs: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)
    _prim_coeffs: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega > 0):
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not np.isfinite(self.theta):
            raise ValueError("theta must be finite")
        if self.samples is not None:
            s = np.asarray(self.samples, dtype=float)
            if s.ndim != 1 or s.shape[0] < 64:
                raise ValueError("tabulated drive needs at least 64 samples per period")
            s = s.copy()
            s.setflags(write=False)
            object.__setattr__(self, "samples", s)
            object.__setattr__(self, "_coeffs", np.fft.rfft(s))
            object.__setattr__(self, "_prim_coeffs", np.fft.rfft(primitive(s, s.shape[0])))

    @property
    def is_harmonic(self) -> bool:
        return self.samples is None

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    def phase(self, t):
        """Fast phase ``omega t + theta``."""
        return self.omega * np.asarray(t, dtype=float) + self.theta

    def f(self, x) -> np.ndarray:
        if self.is_harmonic:
            return np.cos(x)
        return _trig_eval(self._coeffs, self.samples.shape[0], x)

    def primitive(self, x) -> np.ndarray:
        """Zero-mean primitive ``F(x)`` of the drive."""
        if self.is_harmonic:
            return np.sin(x)
        return _trig_eval(self._prim_coeffs, self.samples.shape[0], x)

    def c(self, x) -> np.ndarray:
        """``F(x) / omega`` (hbar = 1)."""
        return self.primitive(x) / self.omega

    def coeff(self, m: int, M: int = PHASE_GRID) -> complex:
        return fourier_coeff(self.f, m, M)

    @property
    def p(self) -> float:
        if self.is_harmonic:
            return 0.5
        return p_factor(self.primitive, self.samples.shape[0])

    def with_theta(self, theta: float) -> "DrivingProfile":
        return DrivingProfile(self.omega, theta, self.samples, self.mean_correction)


def harmonic_profile(omega: float, theta: float = 0.0) -> DrivingProfile:
    """``f = cos``, ``F = sin``, ``f^(+-1) = 1/2``, ``p = 1/2``."""
    return DrivingProfile(omega, theta)


def tabulated_profile(samples, omega: float, theta: float = 0.0) -> DrivingProfile:
    """Drive from samples on a uniform grid; any mean is subtracted and recorded."""
    s = np.asarray(samples, dtype=float)
    mean = float(np.mean(s))
    if mean != 0.0:
        logger.info("subtracting mean %.3e from tabulated drive", mean)
    return DrivingProfile(omega, theta, s - mean, mean_correction=mean)


def profile_from_function(func, omega: float, theta: float = 0.0, M: int = PHASE_GRID) -> DrivingProfile:
    return tabulated_profile(func(phase_grid(M)), omega, theta)


def load_profile(path, omega: float, theta: float = 0.0) -> DrivingProfile:
    """Read a two-column text table ``(theta'_i, f_i)`` on a uniform grid."""
    data = np.loadtxt(Path(path), ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns, got {data.shape[1]}")
    x, f = data[:, 0], data[:, 1]
    n = x.shape[0]
    if n < 64:
        raise ValueError(f"{path}: need at least 64 rows, got {n}")
    expected = x[0] + 2 * np.pi * np.arange(n) / n
    if not np.allclose(x, expected, atol=1e-8):
        raise ValueError(f"{path}: phases must form a uniform grid over one period")
    if abs(x[0]) > 1e-12:
        # rotate to a grid starting at zero via the interpolant
        tmp = tabulated_profile(f, omega)
        f = tmp.f(phase_grid(n) - x[0]) + tmp.mean_correction
    return tabulated_profile(f, omega, theta)
