"""Transformed frame for ``H = V(lambda(t)) f(omega t + theta)``.

The frame change ``R = exp(-i F(theta') V / omega)`` removes ``H`` from the
equation of motion and leaves the slow-drift generator
``W = -i R^H dR/dt`` (``theta'`` held fixed). ``W`` is computed three
independent ways:

* :func:`w_numeric` -- the definition, with ``dR/dlambda`` by central
  differences;
* :func:`w_series` -- the nested-commutator power series in
  ``c = F(theta')/omega``;
* :func:`w_spin_closed` -- the closed form for ``V = g_F F.B``.

The zero Fourier mode ``W^(0)`` generates the adiabatic dynamics inside
one degenerate Floquet band; the other modes couple bands and enter the
adiabaticity measure and the extended-space ``K`` matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .constants import (
    FD_REL_STEP,
    FIELD_EPS_REL,
    PHASE_GRID,
    SERIES_ORDER,
    SERIES_ORDER_CAP,
    TOL,
)
from .driving import DrivingProfile, phase_grid
from .smallmat import check_hermitian, commutator, dagger, hermitize, unitary_exp
from .spin import SpinSystem, zeeman_v


@dataclass(frozen=True)
class VOperatorMap:
    """Slowly varying operator ``V(lambda)`` along a path ``lambda(t)``.

    ``v`` maps a parameter vector to a Hermitian matrix. When ``batched`` is
    set it also accepts a stack ``(n, k)`` of parameter vectors. ``spin``
    marks the Zeeman specialization ``V = g_F F.B`` with ``lambda = B``,
    which unlocks the closed-form routes. ``breakpoints`` lists times where
    ``lambda`` is only piecewise smooth.
    """

    v: Callable[[np.ndarray], np.ndarray]
    lam: Callable[[np.ndarray], np.ndarray]
    lamdot: Callable[[np.ndarray], np.ndarray]
    batched: bool = False
    spin: SpinSystem | None = None
    breakpoints: tuple[float, ...] = ()

    def v_at(self, t) -> np.ndarray:
        return self.v(self.lam(t))

    def v_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if self.batched:
            return self.v(self.lam(ts))
        return np.stack([self.v(self.lam(t)) for t in ts])


def spin_map(sys: SpinSystem, B_of_t, Bdot_of_t, breakpoints: Sequence[float] = ()) -> VOperatorMap:
    """Zeeman map; ``B_of_t`` and ``Bdot_of_t`` must accept scalar or array times."""
    return VOperatorMap(
        v=lambda B: zeeman_v(sys, B),
        lam=B_of_t,
        lamdot=Bdot_of_t,
        batched=True,
        spin=sys,
        breakpoints=tuple(breakpoints),
    )


def linear_spin_map(sys: SpinSystem, B, Bdot) -> VOperatorMap:
    """Map with ``B(t) = B + t Bdot``; at ``t = 0`` it gives field ``B`` and rate ``Bdot``."""
    B = np.asarray(B, dtype=float)
    Bdot = np.asarray(Bdot, dtype=float)
    return spin_map(
        sys,
        lambda t: B + np.multiply.outer(np.asarray(t, dtype=float), Bdot),
        lambda t: np.broadcast_to(Bdot, np.shape(t) + (3,)).copy(),
    )


def r_operator(profile: DrivingProfile, V, phase) -> np.ndarray:
    """``exp(-i F(theta') V / omega)``; ``phase`` may be an array of phases."""
    return unitary_exp(V, profile.c(phase))


def w_numeric(vmap: VOperatorMap, profile: DrivingProfile, phase, t: float,
              rel_step: float = FD_REL_STEP) -> np.ndarray:
    """``W = lambdadot_mu A_mu`` with ``A_mu = -i R^H dR/dlambda_mu``.

    The derivative is a central difference with step
    ``rel_step * max(1, |lambda_mu|)`` at fixed ``phase`` (scalar or array).
    """
    lam = np.asarray(vmap.lam(t), dtype=float)
    lamdot = np.asarray(vmap.lamdot(t), dtype=float)
    if not (np.all(np.isfinite(lam)) and np.all(np.isfinite(lamdot))):
        raise FloatingPointError(f"non-finite slow parameters at t = {t}")
    c = profile.c(phase)
    R0 = unitary_exp(vmap.v(lam), c)
    W = np.zeros_like(R0)
    for mu in np.flatnonzero(lamdot):
        h = rel_step * max(1.0, abs(lam[mu]))
        if not (np.isfinite(h) and lam[mu] + h != lam[mu]):
            raise FloatingPointError(f"finite-difference step {h:g} unusable at lambda = {lam[mu]:g}")
        e = np.zeros_like(lam)
        e[mu] = h
        dR = (unitary_exp(vmap.v(lam + e), c) - unitary_exp(vmap.v(lam - e), c)) / (2 * h)
        W = W + lamdot[mu] * (-1j) * (dagger(R0) @ dR)
    return hermitize(W)


def w_series(c: float, V, Vdot, order: int = SERIES_ORDER) -> np.ndarray:
    """``i sum_k (i c)^k / k! ad_V^(k-1)(Vdot)`` truncated after ``order`` terms.

    Stops early once a term drops below ``1e-12`` of the running sum.
    """
    if order < 1:
        raise ValueError(f"series order must be >= 1, got {order}")
    if order > SERIES_ORDER_CAP:
        raise ValueError(f"series order capped at {SERIES_ORDER_CAP}, got {order}")
    V = check_hermitian(V)
    Vdot = check_hermitian(Vdot)
    nested = Vdot
    total = np.zeros_like(V)
    for k in range(1, order + 1):
        term = 1j * (1j * c) ** k / math.factorial(k) * nested
        total = total + term
        tn = np.linalg.norm(term)
        if k > 1 and tn <= TOL.series_rel * np.linalg.norm(total):
            break
        nested = commutator(V, nested)
    return hermitize(total)


def _spin_x(k, B, Bdot, eps: float) -> np.ndarray:
    """Vector ``X`` with ``W = F.X``; ``k = g_F c``. Broadcasts over leading axes."""
    k = np.asarray(k, dtype=float)[..., None]
    B = np.asarray(B, dtype=float)
    Bdot = np.asarray(Bdot, dtype=float)
    B2 = np.sum(B * B, axis=-1, keepdims=True)
    Bn = np.sqrt(B2)
    BdB = np.sum(B * Bdot, axis=-1, keepdims=True)
    BxBd = np.cross(B, Bdot)
    small = Bn < eps
    Bs = np.where(small, 1.0, Bn)
    x = k * Bs
    closed = (
        -k * BdB * B / Bs**2
        - np.sin(x) * np.cross(BxBd, B) / Bs**3
        + 2.0 * np.sin(0.5 * x) ** 2 * BxBd / Bs**2
    )
    if not np.any(small):
        return closed
    # Taylor expansion of the coefficient functions in B, through B^4
    perp = B2 * Bdot - BdB * B
    k_minus_sinc = k**3 / 6 - k**5 * B2 / 120 + k**7 * B2 * B2 / 5040
    one_minus_cos = k**2 / 2 - k**4 * B2 / 24 + k**6 * B2 * B2 / 720
    taylor = -k * Bdot + k_minus_sinc * perp + one_minus_cos * BxBd
    return np.where(small, taylor, closed)


def field_eps(sys: SpinSystem, omega: float) -> float:
    return FIELD_EPS_REL * omega / abs(sys.g_F) if sys.g_F else np.inf


def w_spin_closed(sys: SpinSystem, B, Bdot, profile: DrivingProfile, phase) -> np.ndarray:
    """Closed-form ``W`` for ``V = g_F F.B`` at phase(s) ``phase``."""
    B = np.asarray(B, dtype=float)
    Bdot = np.asarray(Bdot, dtype=float)
    k = sys.g_F * profile.c(phase)
    X = _spin_x(k, B, Bdot, field_eps(sys, profile.omega))
    return sys.dot(X)


def w_fourier(n: int, t: float, w_of_phase, M: int = PHASE_GRID) -> np.ndarray:
    """``(1/2pi) int W(theta', t) exp(-i n theta') dtheta'`` by trapezoid.

    ``w_of_phase(phases, t)`` returns the stack of ``W`` at an array of phases.
    """
    if M < 4 * abs(n):
        raise ValueError(f"grid of {M} points undersamples mode n = {n}")
    x = phase_grid(M)
    Ws = w_of_phase(x, t)
    return np.einsum("p,pij->ij", np.exp(-1j * n * x), Ws) / M


def w_modes(ns: Sequence[int], t: float, w_of_phase, M: int = PHASE_GRID) -> dict[int, np.ndarray]:
    """Several Fourier modes from one phase-grid evaluation."""
    if M < 4 * max(abs(n) for n in ns):
        raise ValueError(f"grid of {M} points undersamples modes {list(ns)}")
    x = phase_grid(M)
    Ws = w_of_phase(x, t)
    return {n: np.einsum("p,pij->ij", np.exp(-1j * n * x), Ws) / M for n in ns}


def transformed_hamiltonian(vmap: VOperatorMap, profile: DrivingProfile):
    """``(phases, t) -> W`` stack, via the closed form when ``vmap`` is a spin map."""
    if vmap.spin is not None:
        sys = vmap.spin

        def w(phases, t):
            return w_spin_closed(sys, vmap.lam(t), vmap.lamdot(t), profile, phases)
    else:
        def w(phases, t):
            return w_numeric(vmap, profile, phases, t)
    return w


def transformed_along(vmap: VOperatorMap, profile: DrivingProfile, ts) -> np.ndarray:
    """``W(omega t + theta, t)`` for each time in ``ts``."""
    ts = np.asarray(ts, dtype=float)
    phases = profile.phase(ts)
    if vmap.spin is not None:
        sys = vmap.spin
        X = _spin_x(sys.g_F * profile.c(phases), vmap.lam(ts), vmap.lamdot(ts),
                    field_eps(sys, profile.omega))
        return sys.dot(X)
    return np.stack([w_numeric(vmap, profile, x, t) for x, t in zip(phases, ts)])


def bessel_j0(a, M: int | None = None):
    """``J0(a) = (1/2pi) int_0^2pi exp(i a sin x) dx`` by the trapezoid rule.

    The rule is spectrally accurate; the default grid is ``64 + 2 ceil(|a|)``.
    """
    a_arr = np.asarray(a, dtype=float)
    if M is None:
        M = 64 + 2 * int(np.ceil(np.max(np.abs(a_arr)) if a_arr.size else 0.0))
    x = phase_grid(M)
    out = np.mean(np.cos(np.multiply.outer(a_arr, np.sin(x))), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def w0_spin_harmonic(sys: SpinSystem, B, Bdot, omega: float) -> np.ndarray:
    """Zero mode of the spin ``W`` under ``f = cos``: ``[1 - J0(g B/omega)] F.(B x Bdot) / B^2``.

    Below the field threshold the weak-driving limit ``(g^2/4omega^2) F.(B x Bdot)``
    is returned.
    """
    B = np.asarray(B, dtype=float)
    Bdot = np.asarray(Bdot, dtype=float)
    Bn = float(np.linalg.norm(B))
    BxBd = np.cross(B, Bdot)
    if Bn < field_eps(sys, omega):
        return sys.g_F**2 / (4 * omega**2) * sys.dot(BxBd)
    a = sys.g_F * Bn / omega
    return (1.0 - bessel_j0(a)) / Bn**2 * sys.dot(BxBd)


def weak_driving_w0(V, Vdot, p: float, omega: float) -> np.ndarray:
    """``-i p/(2 omega^2) [V, Vdot]``."""
    return hermitize(-1j * p / (2 * omega**2) * commutator(V, Vdot))


def effective_hamiltonian(vmap: VOperatorMap, profile: DrivingProfile, M: int = PHASE_GRID):
    """``t -> W^(0)(t)``: Bessel form for harmonic spin drives, else the zero mode of ``W``."""
    if vmap.spin is not None and profile.is_harmonic:
        sys = vmap.spin

        def w0(t):
            return w0_spin_harmonic(sys, vmap.lam(t), vmap.lamdot(t), profile.omega)
        return w0
    w = transformed_hamiltonian(vmap, profile)

    def w0(t):
        return hermitize(w_fourier(0, t, w, M))
    return w0


def fourier_provider(vmap: VOperatorMap, profile: DrivingProfile, M: int = PHASE_GRID):
    """``(n, t) -> W^(n)(t)`` backed by :func:`transformed_hamiltonian`."""
    w = transformed_hamiltonian(vmap, profile)

    def provider(n, t):
        return w_fourier(n, t, w, M)
    return provider


@dataclass(frozen=True)
class KMatrixBlock:
    """Truncated extended-space Floquet Hamiltonian ``K_nm = n omega delta_nm + W^(n-m)``."""

    n_max: int
    omega: float
    blocks: dict

    @property
    def dim(self) -> int:
        return self.blocks[(0, 0)].shape[0]

    def dense(self) -> np.ndarray:
        ns = range(-self.n_max, self.n_max + 1)
        return np.block([[self.blocks[(n, m)] for m in ns] for n in ns])

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(hermitize(self.dense()))


def k_matrix(t: float, n_max: int, provider, omega: float) -> KMatrixBlock:
    """Assemble ``K`` for bands ``|n| <= n_max`` from ``provider(k, t) = W^(k)(t)``."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    modes = {k: np.asarray(provider(k, t)) for k in range(-2 * n_max, 2 * n_max + 1)}
    d = modes[0].shape[0]
    blocks = {}
    for n in range(-n_max, n_max + 1):
        for m in range(-n_max, n_max + 1):
            blk = modes[n - m].astype(complex)
            if n == m:
                blk = blk + n * omega * np.eye(d)
            blocks[(n, m)] = blk
    return KMatrixBlock(n_max, omega, blocks)


def adiabaticity_check(provider, t: float, n_range: Sequence[int], omega: float) -> float:
    """``max_{n != 0, alpha, beta} |W^(n)_{alpha beta}| / omega``; compare against 1."""
    worst = 0.0
    for n in n_range:
        if n == 0:
            continue
        worst = max(worst, float(np.max(np.abs(provider(n, t)))))
    return worst / omega


@dataclass(frozen=True)
class OracleReport:
    """Largest pairwise Frobenius distances among the three ``W`` routes."""

    f_F: float
    a_max: float
    series_order: int
    draws: int
    d_numeric_series: float
    d_numeric_closed: float
    d_series_closed: float

    @property
    def worst(self) -> float:
        return max(self.d_numeric_series, self.d_numeric_closed, self.d_series_closed)


def w_oracle_triangle(sys: SpinSystem, draws: int, a_max: float, rng: np.random.Generator,
                      profile: DrivingProfile | None = None,
                      series_order: int = SERIES_ORDER) -> OracleReport:
    """Compare :func:`w_numeric`, :func:`w_series` and :func:`w_spin_closed` on random inputs.

    Each draw takes a random field direction with ``a = g_F |B| / omega``
    uniform on ``[0, a_max]``, a Gaussian ``Bdot`` and a uniform phase.
    The series column is skipped (NaN) when ``a_max > 1``, where the
    truncated series is not expected to converge to 1e-6.
    """
    if draws < 1:
        raise ValueError(f"draws must be positive, got {draws}")
    if a_max < 0:
        raise ValueError(f"a_max must be non-negative, got {a_max}")
    if sys.g_F == 0:
        raise ValueError("g_F must be nonzero")
    profile = profile or DrivingProfile(1.0)
    omega = profile.omega
    use_series = a_max <= 1.0
    d_ns = d_nc = d_sc = 0.0
    for _ in range(draws):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        B = u * rng.uniform(0.0, a_max) * omega / abs(sys.g_F)
        Bdot = rng.normal(size=3) * omega / abs(sys.g_F)
        phase = rng.uniform(0.0, 2 * np.pi)
        wn = w_numeric(linear_spin_map(sys, B, Bdot), profile, phase, 0.0)
        wc = w_spin_closed(sys, B, Bdot, profile, phase)
        d_nc = max(d_nc, float(np.linalg.norm(wn - wc)))
        if use_series:
            ws = w_series(float(profile.c(phase)), zeeman_v(sys, B), zeeman_v(sys, Bdot), series_order)
            d_ns = max(d_ns, float(np.linalg.norm(wn - ws)))
            d_sc = max(d_sc, float(np.linalg.norm(ws - wc)))
    if not use_series:
        d_ns = d_sc = float("nan")
    return OracleReport(sys.f_F, float(a_max), series_order, draws, d_ns, d_nc, d_sc)
