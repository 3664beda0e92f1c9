"""Spin operators and the Zeeman coupling ``V(B) = g_F F.B`` (hbar = 1)."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np


def _as_spin(f_F) -> Fraction:
    twice = 2 * float(f_F)
    if not np.isfinite(twice) or twice < 0 or abs(twice - round(twice)) > 1e-12:
        raise ValueError(f"spin quantum number must be a non-negative half-integer, got {f_F}")
    return Fraction(int(round(twice)), 2)


@lru_cache(maxsize=None)
def _spin_matrices(twice_f: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    f = twice_f / 2
    m = f - np.arange(twice_f + 1)
    Fz = np.diag(m).astype(complex)
    # <m+1| F_+ |m> = sqrt(f(f+1) - m(m+1)); rows ordered m = f, f-1, ..., -f
    Fp = np.diag(np.sqrt(f * (f + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    Fm = Fp.conj().T
    Fx = 0.5 * (Fp + Fm)
    Fy = -0.5j * (Fp - Fm)
    for A in (Fx, Fy, Fz):
        A.setflags(write=False)
    return Fx, Fy, Fz


def spin_matrices(f_F) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cartesian spin matrices for spin ``f_F`` in the basis ``m_F = f_F ... -f_F``.

    The returned arrays are cached and read-only.
    """
    return _spin_matrices(int(2 * _as_spin(f_F)))


@dataclass(frozen=True)
class SpinSystem:
    """A spin ``f_F`` with gyromagnetic factor ``g_F`` (frequency per field unit)."""

    f_F: float
    g_F: float = 1.0
    F: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        f = _as_spin(self.f_F)
        if not np.isfinite(self.g_F):
            raise ValueError(f"g_F must be finite, got {self.g_F}")
        object.__setattr__(self, "f_F", float(f))
        F = np.array(spin_matrices(f))
        F.setflags(write=False)
        object.__setattr__(self, "F", F)

    @property
    def dim(self) -> int:
        return int(round(2 * self.f_F)) + 1

    @property
    def m_values(self) -> np.ndarray:
        return self.f_F - np.arange(self.dim)

    @property
    def Fx(self) -> np.ndarray:
        return self.F[0]

    @property
    def Fy(self) -> np.ndarray:
        return self.F[1]

    @property
    def Fz(self) -> np.ndarray:
        return self.F[2]

    def dot(self, vec) -> np.ndarray:
        """``F . vec`` for a 3-vector or a stack of 3-vectors ``(..., 3)``."""
        vec = np.asarray(vec, dtype=float)
        if vec.shape[-1] != 3:
            raise ValueError(f"expected 3-vector(s), got shape {vec.shape}")
        return np.einsum("...i,ijk->...jk", vec, self.F)

    def basis_state(self, m_F) -> np.ndarray:
        idx = np.flatnonzero(np.isclose(self.m_values, float(m_F)))
        if idx.size != 1:
            raise ValueError(f"m_F = {m_F} not available for f_F = {self.f_F}")
        psi = np.zeros(self.dim, dtype=complex)
        psi[idx[0]] = 1.0
        return psi


def zeeman_v(sys: SpinSystem, B) -> np.ndarray:
    """``g_F F.B``; accepts a single field or a stack ``(..., 3)``."""
    B = np.asarray(B, dtype=float)
    if not np.all(np.isfinite(B)):
        raise ValueError("field components must be finite")
    return sys.g_F * sys.dot(B)
