"""Single-qubit states, unitaries and projectors as fixed 2x2 complex arrays.

Head convention: the computational-basis outcome 0 is "head", i.e. the
projector ``P = |0><0|``.  All returned arrays are read-only.
"""
from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from .errors import DomainError, ValidationError

__all__ = [
    "IDENTITY",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "HEAD",
    "TAIL",
    "HADAMARD",
    "make_lambda",
    "conjugate",
    "head_probability",
    "projector_of",
    "phase_invariant_distance",
    "is_unitary",
    "is_projector",
    "check_density",
    "haar_unitaries",
]

STRUCTURE_TOL = 1e-10


def _frozen(a: ArrayLike) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


IDENTITY = _frozen(np.eye(2))
PAULI_X = _frozen([[0, 1], [1, 0]])
PAULI_Y = _frozen([[0, -1j], [1j, 0]])
PAULI_Z = _frozen([[1, 0], [0, -1]])
HEAD = _frozen([[1, 0], [0, 0]])
TAIL = _frozen([[0, 0], [0, 1]])
HADAMARD = _frozen(np.array([[1, 1], [1, -1]]) / np.sqrt(2))


def _as2x2(a: ArrayLike) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 matrix, got shape {a.shape}")
    return a


def is_unitary(U: ArrayLike, tol: float = STRUCTURE_TOL) -> bool:
    """Frobenius-norm check of ``U U^dagger = 1``."""
    U = _as2x2(U)
    return bool(np.linalg.norm(U @ U.conj().T - np.eye(2)) <= tol)


def is_projector(Pi: ArrayLike, tol: float = STRUCTURE_TOL) -> bool:
    """Rank-1 orthogonal projector: idempotent, Hermitian, unit trace."""
    Pi = _as2x2(Pi)
    return bool(
        np.linalg.norm(Pi @ Pi - Pi) <= tol
        and np.linalg.norm(Pi - Pi.conj().T) <= tol
        and abs(np.trace(Pi) - 1) <= tol
    )


def check_density(rho: ArrayLike, tol: float = 1e-8) -> np.ndarray:
    """Return ``rho`` as an array, raising ValidationError unless it is a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {rho.shape}")
    if abs(np.trace(rho) - 1) > tol:
        raise ValidationError(f"trace {np.trace(rho).real:.3g} differs from 1")
    if np.linalg.norm(rho - rho.conj().T) > tol:
        raise ValidationError("matrix is not Hermitian")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValidationError("matrix is not positive semidefinite")
    return rho


def make_lambda(lam: float) -> np.ndarray:
    """Diagonal qubit state ``diag(lam, 1 - lam)`` in the computational basis."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"eigenvalue must lie in [0, 1], got {lam}")
    return _frozen(np.diag([lam, 1.0 - lam]))


def conjugate(U: ArrayLike, A: ArrayLike) -> np.ndarray:
    """``U A U^dagger``."""
    U = _as2x2(U)
    return _frozen(U @ _as2x2(A) @ U.conj().T)


def head_probability(rho: ArrayLike) -> float:
    """``tr(rho P)``, the probability of measuring outcome 0."""
    rho = check_density(_as2x2(rho))
    return float(rho[0, 0].real)


def projector_of(U: ArrayLike) -> np.ndarray:
    """``U P U^dagger``: the head projector rotated by ``U``."""
    U = _as2x2(U)
    col = U[:, 0]
    return _frozen(np.outer(col, col.conj()))


def phase_invariant_distance(U: ArrayLike, V: ArrayLike) -> float:
    """``min_phi ||U - exp(i phi) V||_F`` for unitary ``U``, ``V``.

    The optimum phase aligns ``exp(i phi) tr(U^dagger V)`` with the positive
    real axis, giving ``sqrt(4 - 2 |tr(U^dagger V)|)``.  The norm is evaluated
    directly at that phase; the closed form loses half the digits near zero.
    """
    U, V = _as2x2(U), _as2x2(V)
    ov = np.trace(U.conj().T @ V)
    phase = np.conj(ov) / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(U - phase * V))


def haar_unitaries(rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` Haar-random SU(2) matrices, shape ``(size, 2, 2)``.

    Uses the uniform distribution of unit quaternions on the 3-sphere.
    """
    q = rng.normal(size=(size, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    a, b, c, d = q.T
    out = np.empty((size, 2, 2), dtype=complex)
    out[:, 0, 0] = a + 1j * b
    out[:, 0, 1] = c + 1j * d
    out[:, 1, 0] = -c + 1j * d
    out[:, 1, 1] = a - 1j * b
    return out
