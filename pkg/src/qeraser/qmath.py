"""Fixed-size complex linear algebra for one and two qubits.

States are length-2 complex numpy arrays, operators are 2x2 or 4x4 complex
arrays and Bloch vectors are length-3 real arrays. Two-qubit operators are
always ordered meter first, probe second (``kron(meter_op, probe_op)``).
"""
from __future__ import annotations

import math

import numpy as np

from .errors import (
    InvalidDirectionError,
    InvalidObservableError,
    InvalidPurityError,
    ShapeError,
)

TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# Two-qubit tensor ordering; not configurable.
METER_FIRST = True

AXES = {
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
}


def wrap_angle(phi: float) -> float:
    """Map an angle onto (-pi, pi]."""
    w = math.pi - (math.pi - phi) % (2 * math.pi)
    # float modulo can return exactly 2*pi for tiny negative arguments
    return w + 2 * math.pi if w <= -math.pi else w


def angle_diff(a: float, b: float) -> float:
    """Signed difference a - b reduced to (-pi, pi]."""
    return wrap_angle(a - b)


def as_direction(n, tol: float = 1e-9) -> np.ndarray:
    v = np.asarray(n, dtype=float).reshape(-1)
    if v.shape != (3,):
        raise ShapeError(f"Bloch vector must have 3 components, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > tol:
        raise InvalidDirectionError(f"direction must be a unit vector (norm={norm!r})")
    return v


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise InvalidDirectionError("cannot normalize the zero vector")
    return v / norm


def as_state(psi, tol: float = 1e-12) -> np.ndarray:
    s = np.asarray(psi, dtype=complex).reshape(-1)
    if s.shape != (2,):
        raise ShapeError(f"qubit state must have 2 amplitudes, got shape {s.shape}")
    norm2 = float(np.vdot(s, s).real)
    if abs(norm2 - 1.0) > tol:
        raise ShapeError(f"state is not normalized (|psi|^2={norm2!r})")
    return s


def canonical(psi, tol: float = 1e-12) -> np.ndarray:
    """Fix the global phase so the first non-negligible amplitude is real and >= 0."""
    s = np.array(psi, dtype=complex).reshape(-1)
    for amp in s:
        if abs(amp) > tol:
            return s * (abs(amp) / amp)
    return s


def pauli_along(n, tol: float = 1e-9) -> np.ndarray:
    n = as_direction(n, tol)
    return n[0] * SIGMA_X + n[1] * SIGMA_Y + n[2] * SIGMA_Z


def bloch_matrix(v) -> np.ndarray:
    """v . sigma for an arbitrary real 3-vector (no normalization check)."""
    v = np.asarray(v, dtype=float)
    return v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z


def density_from_bloch(m, purity: float) -> np.ndarray:
    """Mixed qubit state (I + P m.sigma)/2."""
    m = as_direction(m)
    if not 0.0 <= purity <= 1.0:
        raise InvalidPurityError(f"purity must lie in [0, 1], got {purity!r}")
    return 0.5 * (I2 + purity * bloch_matrix(m))


def state_from_bloch(v) -> np.ndarray:
    v = as_direction(v)
    z = min(1.0, max(-1.0, float(v[2])))
    polar = math.acos(z)
    azimuth = math.atan2(v[1], v[0])
    s = np.array([math.cos(polar / 2), np.exp(1j * azimuth) * math.sin(polar / 2)])
    return canonical(s)


def bloch_from_state(psi) -> np.ndarray:
    s = np.asarray(psi, dtype=complex).reshape(2)
    s = s / np.linalg.norm(s)
    return np.array([np.vdot(s, p @ s).real for p in PAULIS])


def bloch_from_density(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(rho @ p).real for p in PAULIS])


def is_hermitian(M, tol: float = TOL) -> bool:
    M = np.asarray(M)
    return M.ndim == 2 and M.shape[0] == M.shape[1] and np.allclose(M, M.conj().T, rtol=0, atol=tol)


def is_unitary(M, tol: float = TOL) -> bool:
    M = np.asarray(M)
    return np.allclose(M.conj().T @ M, np.eye(M.shape[0]), rtol=0, atol=tol)


def is_projector(M, tol: float = TOL) -> bool:
    M = np.asarray(M)
    return is_hermitian(M, tol) and np.allclose(M @ M, M, rtol=0, atol=tol)


def is_density(M, tol: float = TOL) -> bool:
    M = np.asarray(M)
    if not is_hermitian(M, tol) or abs(np.trace(M) - 1) > tol:
        return False
    return bool(np.linalg.eigvalsh(M).min() >= -tol)


def unitary_exp(A, g: float, tol: float = TOL) -> np.ndarray:
    """Return exp(-i g A) for a 2x2 Hermitian A.

    Uses the Pauli decomposition A = a0 I + a.sigma, for which
    exp(-i g A) = exp(-i g a0) [cos(g|a|) I - i sin(g|a|) (a/|a|).sigma].
    """
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise ShapeError(f"expected a 2x2 operator, got shape {A.shape}")
    if not is_hermitian(A, tol):
        raise InvalidObservableError("generator of the evolution must be Hermitian")
    a0 = 0.5 * np.trace(A).real
    a = np.array([0.5 * np.trace(A @ p).real for p in PAULIS])
    length = float(np.linalg.norm(a))
    phase = np.exp(-1j * g * a0)
    if length == 0.0:
        return phase * I2
    axis = bloch_matrix(a / length)
    return phase * (math.cos(g * length) * I2 - 1j * math.sin(g * length) * axis)


def projector(r) -> np.ndarray:
    """(I + r.sigma)/2, the projector onto the pure state along r."""
    return 0.5 * (I2 + pauli_along(r))


def ket_projector(psi) -> np.ndarray:
    s = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(s, s.conj())


def tensor_product(A, B) -> np.ndarray:
    """Meter-first Kronecker product of two single-qubit operators."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != (2, 2) or B.shape != (2, 2):
        raise ShapeError(f"tensor_product expects two 2x2 operators, got {A.shape} and {B.shape}")
    return np.kron(A, B)
