"""Dense complex matrix kernel.

Operators are plain complex ``numpy`` arrays of shape ``(d, d)``; most
functions also accept stacks ``(..., d, d)`` so that propagation can be
batched over time steps. Hermitian exponentials are evaluated spectrally,
which keeps them unitary to machine precision.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import schur

from .constants import TOL


class NonHermitianError(ValueError):
    """Raised when an operator expected to be Hermitian is not."""

    def __init__(self, defect: float, norm: float):
        self.defect = defect
        self.norm = norm
        super().__init__(
            f"matrix is not Hermitian: |A - A^H|_F = {defect:.3e} "
            f"(|A|_F = {norm:.3e})"
        )


def dagger(A: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(A, -1, -2))


def _check_square(A: np.ndarray) -> None:
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {A.shape}")


def _check_same_shape(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape[-2:] != B.shape[-2:]:
        raise ValueError(f"dimension mismatch: {A.shape[-2:]} vs {B.shape[-2:]}")


def hermitian_defect(A) -> float:
    """Largest ``|A - A^H|_F`` over a stack of matrices."""
    A = np.asarray(A)
    d = np.linalg.norm(A - dagger(A), axis=(-2, -1))
    return float(np.max(d))


def unitarity_defect(U) -> float:
    """Largest ``|U^H U - I|_F`` over a stack of matrices."""
    U = np.asarray(U)
    eye = np.eye(U.shape[-1])
    d = np.linalg.norm(dagger(U) @ U - eye, axis=(-2, -1))
    return float(np.max(d))


def hermitize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + dagger(A))


def check_hermitian(A, rtol: float = TOL.hermitian_rel) -> np.ndarray:
    """Return ``A`` as a complex array, raising if it is not Hermitian."""
    A = np.asarray(A, dtype=complex)
    _check_square(A)
    defect = np.linalg.norm(A - dagger(A), axis=(-2, -1))
    norm = np.linalg.norm(A, axis=(-2, -1))
    bad = defect > rtol * norm
    if np.any(bad):
        i = np.unravel_index(np.argmax(np.where(bad, defect, -1.0)), bad.shape)
        raise NonHermitianError(float(defect[i]), float(norm[i]))
    return A


def herm_eig(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix (or stack).

    Returns ascending eigenvalues ``w`` and a unitary ``Q`` with
    ``A = Q diag(w) Q^H``.

    Raises:
        NonHermitianError: if ``|A - A^H|_F > 1e-12 |A|_F``.
    """
    A = check_hermitian(A)
    return np.linalg.eigh(hermitize(A))


def unitary_exp(H, s=1.0) -> np.ndarray:
    """``exp(-i s H)`` for Hermitian ``H``.

    ``s`` may be a scalar or an array broadcasting against the leading
    (stack) axes of ``H``; a 2-D ``H`` with an array ``s`` gives one
    exponential per entry of ``s``.
    """
    w, Q = herm_eig(H)
    s = np.asarray(s, dtype=float)
    phases = np.exp(-1j * s[..., None] * w)
    return (Q * phases[..., None, :]) @ dagger(Q)


def commutator(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    _check_same_shape(A, B)
    return A @ B - B @ A


def dist(A, B) -> float:
    """Frobenius norm of ``A - B``."""
    A = np.asarray(A)
    B = np.asarray(B)
    _check_same_shape(A, B)
    return float(np.linalg.norm(A - B))


def ordered_product(Us: np.ndarray) -> np.ndarray:
    """Time-ordered product ``U[n-1] @ ... @ U[1] @ U[0]``.

    Reduced pairwise so the work is batched matrix products.
    """
    Us = np.asarray(Us)
    if Us.shape[0] == 0:
        raise ValueError("empty product")
    while Us.shape[0] > 1:
        if Us.shape[0] % 2:
            head = Us[1::2] @ Us[0:-1:2]
            Us = np.concatenate([head, Us[-1:]], axis=0)
        else:
            Us = Us[1::2] @ Us[0::2]
    return Us[0]


def log_unitary(U) -> np.ndarray:
    """Hermitian ``G`` with ``U = exp(i G)``, eigenphases in ``(-pi, pi]``.

    Uses the complex Schur form, which is diagonal for normal matrices.
    """
    U = np.asarray(U, dtype=complex)
    T, Z = schur(U, output="complex")
    phases = np.angle(np.diag(T))
    phases = np.where(phases <= -np.pi, phases + 2 * np.pi, phases)
    return hermitize((Z * phases) @ dagger(Z))
