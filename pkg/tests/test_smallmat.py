import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from floquet_phases.smallmat import (
    NonHermitianError,
    commutator,
    dist,
    herm_eig,
    hermitian_defect,
    log_unitary,
    ordered_product,
    unitarity_defect,
    unitary_exp,
)

from conftest import random_hermitian


def taylor_exp(A, terms=80):
    """Plain power series for exp(A); the independent oracle."""
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


entries = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@st.composite
def hermitian(draw, max_dim=4, dim=None):
    d = dim or draw(st.integers(1, max_dim))
    re = draw(arrays(float, (d, d), elements=entries))
    im = draw(arrays(float, (d, d), elements=entries))
    A = re + 1j * im
    return (A + A.conj().T) / 2


def test_unitary_exp_matches_taylor(rng):
    for d in (2, 3, 4):
        H = random_hermitian(rng, d)
        assert dist(unitary_exp(H, 0.7), taylor_exp(-0.7j * H)) < 1e-12


def test_unitary_exp_pauli_closed_form():
    sy = np.array([[0, -1j], [1j, 0]])
    t = 0.3
    expected = math.cos(t) * np.eye(2) - 1j * math.sin(t) * sy
    assert dist(unitary_exp(sy, t), expected) < 1e-15


@given(hermitian(), st.floats(-5, 5))
@settings(max_examples=60, deadline=None)
def test_exponential_is_unitary_and_invertible(H, s):
    U = unitary_exp(H, s)
    assert unitarity_defect(U) < 1e-10
    assert dist(U @ unitary_exp(H, -s), np.eye(H.shape[0])) < 1e-10


@given(hermitian())
@settings(max_examples=60, deadline=None)
def test_herm_eig_reconstructs(H):
    w, Q = herm_eig(H)
    assert np.all(np.diff(w) >= -1e-12)
    assert dist(Q @ np.diag(w) @ Q.conj().T, H) < 1e-10 * max(1.0, np.linalg.norm(H))


def test_herm_eig_rejects_non_hermitian():
    A = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(NonHermitianError) as info:
        herm_eig(A)
    assert info.value.defect > 0


def test_herm_eig_tolerates_roundoff():
    A = np.array([[1.0, 0.5 + 1e-15j], [0.5, 2.0]])
    herm_eig(A)


def test_stacked_exponent_broadcasts(rng):
    H = random_hermitian(rng, 3)
    s = np.array([0.1, 0.2, 0.3])
    stack = unitary_exp(H, s)
    assert stack.shape == (3, 3, 3)
    for k in range(3):
        assert dist(stack[k], unitary_exp(H, s[k])) < 1e-14


@given(hermitian(dim=3), hermitian(dim=3))
@settings(max_examples=40, deadline=None)
def test_commutator_antisymmetric(A, B):
    assert dist(commutator(A, B), -commutator(B, A)) < 1e-12
    # i[A, B] is Hermitian for Hermitian A, B
    assert hermitian_defect(1j * commutator(A, B)) < 1e-10


def test_shape_mismatch_raises():
    with pytest.raises(ValueError):
        commutator(np.eye(2), np.eye(3))
    with pytest.raises(ValueError):
        dist(np.eye(2), np.eye(3))


@pytest.mark.parametrize("n", [1, 2, 5, 8, 13])
def test_ordered_product_is_time_ordered(rng, n):
    Us = np.array([unitary_exp(random_hermitian(rng, 3), 1.0) for _ in range(n)])
    expected = np.eye(3, dtype=complex)
    for U in Us:
        expected = U @ expected
    assert dist(ordered_product(Us), expected) < 1e-12


def test_ordered_product_empty():
    with pytest.raises(ValueError):
        ordered_product(np.zeros((0, 2, 2)))


@given(hermitian(dim=4))
@settings(max_examples=40, deadline=None)
def test_log_unitary_round_trip(H):
    # keep eigenphases inside (-pi, pi) so the principal log returns H
    scale = 3.0 / max(1.0, float(np.max(np.abs(np.linalg.eigvalsh(H)))))
    G = scale * H
    U = unitary_exp(G, -1.0)
    assert dist(log_unitary(U), G) < 1e-9
