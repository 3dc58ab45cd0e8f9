"""Single-qubit operators and rotation conventions.

Rotations follow ``R_n(theta) = exp(-i theta/2 n.sigma)``. Barred axes
(``xbar``, ``ybar``, ``zbar``) negate the generator. Basis ordering is
``(|0>, |1>)`` with ``|0>`` at the north pole of the Bloch sphere.
"""

from __future__ import annotations

import math

import numpy as np

I2 = np.eye(2, dtype=np.complex128)
SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI_BASIS = np.stack([I2, SX, SY, SZ])
HADAMARD = (SX + SZ) / math.sqrt(2.0)

KET_0 = np.array([1, 0], dtype=np.complex128)
KET_1 = np.array([0, 1], dtype=np.complex128)

AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
    "xbar": np.array([-1.0, 0.0, 0.0]),
    "ybar": np.array([0.0, -1.0, 0.0]),
    "zbar": np.array([0.0, 0.0, -1.0]),
}


def rotation(axis, angle: float) -> np.ndarray:
    """``exp(-i angle/2 n.sigma)`` for an axis name or a unit 3-vector."""
    n = AXES[axis] if isinstance(axis, str) else np.asarray(axis, dtype=float)
    gen = n[0] * SX + n[1] * SY + n[2] * SZ
    return math.cos(angle / 2) * I2 - 1j * math.sin(angle / 2) * gen


def rz(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def unitarity_error(u: np.ndarray) -> float:
    """Frobenius norm of ``U^dagger U - I``."""
    u = np.asarray(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def is_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    return unitarity_error(u) < atol


def normalize_state(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=np.complex128)
    return psi / np.linalg.norm(psi)


def check_state(psi, atol: float = 1e-10) -> np.ndarray:
    """Return ``psi`` as a complex 2-vector, raising if it is not normalised."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (2,):
        raise ValueError(f"qubit state must have shape (2,), got {psi.shape}")
    if abs(np.linalg.norm(psi) - 1.0) > atol:
        raise ValueError(f"qubit state is not normalised (norm {np.linalg.norm(psi):.3g})")
    return psi


def gate_overlap_fidelity(u: np.ndarray, v: np.ndarray) -> float:
    """``|Tr(U^dagger V)/2|^2``, insensitive to global phase."""
    return float(abs(np.trace(np.asarray(u).conj().T @ np.asarray(v)) / 2.0) ** 2)


def haar_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary (QR of a complex Gaussian matrix)."""
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
