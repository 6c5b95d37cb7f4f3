"""Weak and modular values computed straight from their definitions.

    A_w = <f|A|i> / <f|i>
    A_m = <f|exp(-i g A)|i> / <f|i>

For a qubit probe the rotation exp(-i (g/2) sigma_n) is obtained by passing
``A = sigma_n / 2``; at g = pi this gives A_m = -i (sigma_n)_w.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from . import qmath
from .errors import DivisionUndefinedError, InvalidObservableError, OrthogonalPostselectionError

OVERLAP_TOL = 1e-12


class ComplexValue(complex):
    """A complex number that also reports its polar form."""

    def __new__(cls, value):
        value = complex(value)
        return super().__new__(cls, value.real, value.imag)

    @property
    def re(self) -> float:
        return self.real

    @property
    def im(self) -> float:
        return self.imag

    @property
    def modulus(self) -> float:
        return abs(self)

    @property
    def argument(self) -> float:
        return qmath.wrap_angle(math.atan2(self.imag, self.real))

    @classmethod
    def from_polar(cls, modulus: float, argument: float) -> "ComplexValue":
        return cls(cmath.rect(modulus, argument))


def _overlap(psi_i, psi_f, tol):
    ov = np.vdot(psi_f, psi_i)
    if abs(ov) < tol:
        raise OrthogonalPostselectionError(
            f"orthogonal post-selection: |<f|i>| = {abs(ov):.3e} below {tol:g}"
        )
    return ov


def weak_value(A, psi_i, psi_f, tol: float = OVERLAP_TOL) -> ComplexValue:
    A = np.asarray(A, dtype=complex)
    if not qmath.is_hermitian(A):
        raise InvalidObservableError("weak values are defined here for Hermitian observables only")
    ov = _overlap(psi_i, psi_f, tol)
    return ComplexValue(np.vdot(psi_f, A @ np.asarray(psi_i, dtype=complex)) / ov)


def modular_value(A, g: float, psi_i, psi_f, tol: float = OVERLAP_TOL) -> ComplexValue:
    U = qmath.unitary_exp(A, g)
    ov = _overlap(psi_i, psi_f, tol)
    return ComplexValue(np.vdot(psi_f, U @ np.asarray(psi_i, dtype=complex)) / ov)


def weak_from_modular_firstorder(A_m: complex, g: float) -> ComplexValue:
    """(1 - A_m)/(i g): first-order inversion of A_m = 1 - i g A_w."""
    if g == 0:
        raise DivisionUndefinedError("coupling g must be non-zero")
    return ComplexValue((1 - complex(A_m)) / (1j * g))


def sigma_weak_from_modular_exact(A_m: complex) -> ComplexValue:
    """Weak value of sigma_n from the modular value of sigma_n/2 at g = pi."""
    return ComplexValue(1j * complex(A_m))
