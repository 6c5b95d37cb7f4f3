"""Bloch-sphere geometry behind the weak-value argument.

Solid angles of geodesic polygons are obtained from Bargmann invariants:
for a loop of pure states s1 -> s2 -> ... -> sk -> s1,

    Omega = -2 arg(<s1|sk><sk|s(k-1)> ... <s2|s1>),

positive when the loop runs counterclockwise seen from outside the sphere.
The value is defined modulo 4*pi and reported in [-2*pi, 2*pi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import qmath
from .errors import (
    AmbiguousLiftError,
    DegenerateLoopError,
    OrthogonalPostselectionError,
    UndefinedArgumentError,
    UndefinedConnectionError,
)

OVERLAP_TOL = 1e-12

# Rotation by 2*pi/3 about (1,1,1): sends sigma_z -> sigma_x -> sigma_y -> sigma_z.
# Maps polarisation Jones vectors onto a Bloch gauge with in-phase horizontal lifts.
_CYCLE = 0.5 * (qmath.I2 - 1j * (qmath.SIGMA_X + qmath.SIGMA_Y + qmath.SIGMA_Z))


@dataclass(frozen=True)
class SphericalCoord:
    """Half-angle coordinates: 2*eta is the azimuth, 2*chi the latitude."""

    eta: float
    chi: float

    def to_bloch(self) -> np.ndarray:
        c = math.cos(2 * self.chi)
        return np.array([math.cos(2 * self.eta) * c, math.sin(2 * self.eta) * c, math.sin(2 * self.chi)])

    def state(self) -> np.ndarray:
        """State in the gauge where equal-eta and equator transports are in phase."""
        ce, se = math.cos(self.eta), math.sin(self.eta)
        cc, sc = math.cos(self.chi), math.sin(self.chi)
        jones = np.array([ce * cc - 1j * se * sc, se * cc + 1j * ce * sc])
        return _CYCLE @ jones

    @classmethod
    def from_bloch(cls, v) -> "SphericalCoord":
        v = qmath.as_direction(v)
        z = min(1.0, max(-1.0, float(v[2])))
        return cls(eta=0.5 * math.atan2(v[1], v[0]), chi=0.5 * math.asin(z))


@dataclass(frozen=True)
class SolidAngle:
    value: float

    @property
    def orientation(self) -> str:
        if self.value > 0:
            return "ccw"
        if self.value < 0:
            return "cw"
        return "none"

    def __float__(self) -> float:
        return self.value

    def __neg__(self) -> "SolidAngle":
        return SolidAngle(-self.value)


def wrap_solid_angle(omega: float) -> float:
    """Reduce a solid angle modulo 4*pi onto (-2*pi, 2*pi]."""
    return 2.0 * qmath.wrap_angle(omega / 2.0)


def mirror_image(i, n) -> np.ndarray:
    """Reflect i through the axis n: 2(n.i)n - i."""
    i = qmath.as_direction(i)
    n = qmath.as_direction(n)
    return 2.0 * np.dot(n, i) * n - i


def pancharatnam_connection(a, b, tol: float = OVERLAP_TOL) -> float:
    """arg<b|a> for two non-orthogonal states."""
    overlap = np.vdot(b, a)
    if abs(overlap) < tol:
        raise UndefinedConnectionError("Pancharatnam connection undefined for orthogonal states")
    return qmath.wrap_angle(math.atan2(overlap.imag, overlap.real))


def connection_closed_form(a: SphericalCoord, b: SphericalCoord) -> float:
    """arg<b|a> from half-angle coordinates, for states built by SphericalCoord.state."""
    d = a.eta - b.eta
    return qmath.wrap_angle(
        math.atan2(-math.sin(d) * math.sin(a.chi + b.chi), math.cos(d) * math.cos(a.chi - b.chi))
    )


def bargmann_invariant(loop: Sequence, tol: float = OVERLAP_TOL) -> complex:
    states = [np.asarray(s, dtype=complex) for s in loop]
    if len(states) < 3:
        raise ValueError("a loop needs at least three states")
    k = len(states)
    product = 1.0 + 0j
    for j in range(k):
        nxt = (j + 1) % k
        overlap = np.vdot(states[nxt], states[j])
        if abs(overlap) < tol:
            raise DegenerateLoopError((j, nxt), abs(overlap))
        product *= overlap
    return complex(product)


def bargmann_solid_angle(loop: Sequence, tol: float = OVERLAP_TOL) -> SolidAngle:
    b = bargmann_invariant(loop, tol)
    return SolidAngle(-2.0 * qmath.wrap_angle(math.atan2(b.imag, b.real)))


def solid_angle_of_directions(directions: Sequence, tol: float = OVERLAP_TOL) -> SolidAngle:
    return bargmann_solid_angle([qmath.state_from_bloch(v) for v in directions], tol)


def equator_lift(state, tol: float = OVERLAP_TOL) -> np.ndarray:
    """State on the equator with the same azimuth as ``state``."""
    v = qmath.bloch_from_state(state)
    horizontal = math.hypot(v[0], v[1])
    if horizontal < tol:
        raise AmbiguousLiftError("equator lift of a pole state has no defined azimuth")
    return qmath.state_from_bloch(np.array([v[0] / horizontal, v[1] / horizontal, 0.0]))


class TriangleDecomposition(NamedTuple):
    ab: SolidAngle
    bc: SolidAngle
    ca: SolidAngle
    # Solid angle of the equatorial triangle a_e b_e c_e: 0, or 2*pi (mod 4*pi)
    # when the three lifted azimuths do not fit in a half circle.
    equator: SolidAngle

    @property
    def quadrangle_sum(self) -> float:
        return self.ab.value + self.bc.value + self.ca.value

    @property
    def total(self) -> float:
        return self.quadrangle_sum + self.equator.value


def decompose_triangle(a, b, c, tol: float = OVERLAP_TOL) -> TriangleDecomposition:
    """Split the geodesic triangle abc into three equator-anchored quadrangles.

    Omega_abc equals ``total`` modulo 4*pi; when the lifted azimuths lie in a
    common half circle the equator term vanishes and Omega_abc is the sum of
    the three quadrangles alone.
    """
    ae, be, ce = (equator_lift(s, tol) for s in (a, b, c))
    return TriangleDecomposition(
        ab=bargmann_solid_angle([a, b, be, ae], tol),
        bc=bargmann_solid_angle([b, c, ce, be], tol),
        ca=bargmann_solid_angle([c, a, ae, ce], tol),
        equator=bargmann_solid_angle([ae, be, ce], tol),
    )


def _check_postselection(i, f, tol):
    # |<f|i>|^2 = (1 + i.f)/2
    if math.sqrt(max(0.0, 0.5 * (1.0 + float(np.dot(i, f))))) < tol:
        raise OrthogonalPostselectionError("orthogonal post-selection: i and f are antipodal")


def weak_argument_geometric(i, n, f, tol: float = 1e-14) -> float:
    """Argument of the weak value of sigma_n from Bloch directions alone.

    atan2((n x i).f, n.i + n.f), on (-pi, pi].
    """
    i, n, f = (qmath.as_direction(v) for v in (i, n, f))
    _check_postselection(i, f, OVERLAP_TOL)
    num = float(np.dot(np.cross(n, i), f))
    den = float(np.dot(n, i) + np.dot(n, f))
    if abs(num) < tol and abs(den) < tol:
        raise UndefinedArgumentError("weak-value argument undefined: <f|sigma_n|i> vanishes")
    return qmath.wrap_angle(math.atan2(num, den))


def weak_argument_solid_angle(i, n, f, tol: float = OVERLAP_TOL) -> float:
    """Same argument, as minus half the solid angle of the loop i -> n -> i' -> f."""
    i, n, f = (qmath.as_direction(v) for v in (i, n, f))
    _check_postselection(i, f, tol)
    omega = solid_angle_of_directions([i, n, mirror_image(i, n), f], tol)
    return qmath.wrap_angle(-0.5 * omega.value)
