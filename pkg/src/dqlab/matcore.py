"""Dense complex linear algebra used by every simulation layer.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
All generators in this package are Hermitian, so exponentials go through
``numpy.linalg.eigh`` and are unitary by construction.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from dqlab.errors import NumericalError, ValidationError

HERMITIAN_TOL = 1e-12

ComplexMatrix = NDArray[np.complex128]


def as_matrix(a: ArrayLike) -> ComplexMatrix:
    """Return ``a`` as a square complex matrix, validating the shape."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValidationError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def hermiticity_error(a: ArrayLike) -> float:
    m = as_matrix(a)
    return float(np.max(np.abs(m - m.conj().T)))


def as_hermitian(a: ArrayLike, tol: float = HERMITIAN_TOL) -> ComplexMatrix:
    """Validate that ``a`` is Hermitian within ``tol`` and return it."""
    m = as_matrix(a)
    err = hermiticity_error(m)
    if err > tol:
        raise ValidationError(f"matrix is not Hermitian: max|A - A^dag| = {err:.3e} > {tol:.1e}")
    return m


def normalize(v: ArrayLike) -> NDArray[np.complex128]:
    """Normalize a state vector to unit 2-norm."""
    psi = np.asarray(v, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(psi)
    if psi.size == 0 or norm == 0.0:
        raise ValidationError("cannot normalize a zero-length or zero vector")
    return psi / norm


def expm_generator(h: ArrayLike, t: float, hbar: float = 1.0) -> ComplexMatrix:
    """Time-evolution operator ``exp(-i H t / hbar)`` of a Hermitian generator.

    Parameters
    ----------
    h : array_like
        Hermitian generator (energy units).
    t : float
        Evolution time; negative values give the inverse evolution.
    hbar : float, optional
        Reduced Planck constant in the caller's units.

    Returns
    -------
    numpy.ndarray
        Unitary matrix ``Q exp(-i Lambda t / hbar) Q^dag``.
    """
    m = as_hermitian(h)
    if hbar == 0:
        raise ValidationError("hbar must be non-zero")
    # symmetrize so eigh sees an exactly Hermitian matrix
    m = 0.5 * (m + m.conj().T)
    if t == 0:
        return np.eye(m.shape[0], dtype=np.complex128)
    try:
        evals, q = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"eigendecomposition failed (dim={m.shape[0]}, ||H||_F={np.linalg.norm(m):.3e})"
        ) from exc
    phases = np.exp(-1j * evals * (t / hbar))
    return (q * phases) @ q.conj().T


def tensor(a: ArrayLike, b: ArrayLike) -> ComplexMatrix:
    """Kronecker product, flat index ``i_a * dim_b + i_b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def phase_distance(a: ArrayLike, b: ArrayLike) -> float:
    """Frobenius distance between ``a`` and ``b`` minimized over a global phase of ``b``."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise ValidationError(f"shape mismatch: {ma.shape} vs {mb.shape}")
    overlap = np.trace(mb.conj().T @ ma)
    phase = np.exp(1j * np.angle(overlap)) if overlap != 0 else 1.0
    return float(np.linalg.norm(ma - phase * mb))


def unitarity_error(u: ArrayLike) -> float:
    m = as_matrix(u)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def require_unitary(u: ArrayLike, tol: float = 1e-10, name: str = "matrix") -> ComplexMatrix:
    m = as_matrix(u)
    err = unitarity_error(m)
    if err > tol:
        raise ValidationError(f"{name} is not unitary: max|U^dag U - I| = {err:.3e}")
    return m
