"""Quantum-eraser measurement of modular values with a qubit meter.

The probe (any qubit state) couples to a meter qubit through the controlled gate

    U = Pi_r (x) I + exp(i delta) Pi_{-r} (x) exp(-i g A).

A phase shifter on the meter, R_xi = Pi_r + exp(-i xi) Pi_{-r}, rotates the
modular value by -xi in the complex plane, so the joint detection probability
of the meter along q_re and the probe in psi_f behaves as 1 + V cos(phi - xi)
and peaks when xi compensates phi = arg(exp(i delta) A_m).

Everything is computed two ways: closed forms, and a brute-force 4x4 density
matrix evolution (``bruteforce_conditional``) that uses no closed forms and
serves as the oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np

from . import qmath, values
from .errors import (
    CollinearConfigurationError,
    DegenerateStrengthError,
    EraserConditionError,
    InconsistentVisibilityError,
    InvalidObservableError,
    ModelViolationError,
    NoPostselectionError,
    ShapeError,
    SingularCoefficientError,
)
from .values import ComplexValue

OVERLAP_TOL = 1e-12
ERASER_TOL = 1e-9
DISC_CLAMP = 1e-12
DEFAULT_XI = (0.0, 0.5 * math.pi, math.pi)


def _frozen(a, dtype):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProtocolConfig:
    """One run of the protocol.

    ``m`` and ``purity`` give the initial meter state (I + purity m.sigma)/2,
    ``r`` is the control direction, ``A`` the probe observable with coupling
    ``g``, ``delta`` the gate phase, ``psi_i``/``psi_f`` the pre- and
    post-selected probe states.
    """

    m: np.ndarray
    purity: float
    r: np.ndarray
    A: np.ndarray
    g: float
    psi_i: np.ndarray
    psi_f: np.ndarray
    delta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "m", _frozen(qmath.as_direction(self.m), float))
        object.__setattr__(self, "r", _frozen(qmath.as_direction(self.r), float))
        # density_from_bloch validates the purity range
        qmath.density_from_bloch(self.m, self.purity)
        A = np.asarray(self.A, dtype=complex)
        if A.shape != (2, 2):
            raise ShapeError(f"probe observable must be 2x2, got {A.shape}")
        if not qmath.is_hermitian(A):
            raise InvalidObservableError("probe observable must be Hermitian")
        object.__setattr__(self, "A", _frozen(A, complex))
        object.__setattr__(self, "psi_i", _frozen(qmath.as_state(self.psi_i, 1e-10), complex))
        object.__setattr__(self, "psi_f", _frozen(qmath.as_state(self.psi_f, 1e-10), complex))

    @property
    def theta(self) -> float:
        """Measurement strength arccos(m.r), in [0, pi]."""
        return math.acos(min(1.0, max(-1.0, float(np.dot(self.m, self.r)))))

    @property
    def overlap(self) -> complex:
        return complex(np.vdot(self.psi_f, self.psi_i))

    @property
    def orthogonal(self) -> bool:
        return abs(self.overlap) < OVERLAP_TOL

    @property
    def rho_m(self) -> np.ndarray:
        return qmath.density_from_bloch(self.m, self.purity)

    def replace(self, **changes) -> "ProtocolConfig":
        return replace(self, **changes)

    def describe(self) -> dict:
        """Plain-python description, suitable for JSON."""
        def cplx(a):
            return [[z.real, z.imag] for z in np.asarray(a).reshape(-1)]

        return {
            "m": self.m.tolist(),
            "purity": self.purity,
            "r": self.r.tolist(),
            "A": cplx(self.A),
            "g": self.g,
            "delta": self.delta,
            "psi_i": cplx(self.psi_i),
            "psi_f": cplx(self.psi_f),
        }


def postselection_state(alpha: float) -> np.ndarray:
    """cos(alpha)|0> + sin(alpha)|1> (|H>, |V> polarisation)."""
    return np.array([math.cos(alpha), math.sin(alpha)], dtype=complex)


def cnot_config(theta: float, purity: float, alpha: float) -> ProtocolConfig:
    """The CNOT set-up: meter m = (sin t, 0, cos t), control along z, probe |0>.

    With A = sigma_x/2, g = pi and delta = pi/2 the gate is
    Pi_0 (x) I + Pi_1 (x) sigma_x.
    """
    return ProtocolConfig(
        m=(math.sin(theta), 0.0, math.cos(theta)),
        purity=purity,
        r=(0.0, 0.0, 1.0),
        A=0.5 * qmath.SIGMA_X,
        g=math.pi,
        delta=0.5 * math.pi,
        psi_i=(1.0, 0.0),
        psi_f=postselection_state(alpha),
    )


def random_config(rng: np.random.Generator, theta_range=(0.05 * math.pi, 0.95 * math.pi)) -> ProtocolConfig:
    def unit():
        v = rng.normal(size=3)
        return v / np.linalg.norm(v)

    def ket():
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        return v / np.linalg.norm(v)

    r = unit()
    perp = np.cross(r, unit())
    perp /= np.linalg.norm(perp)
    theta = rng.uniform(*theta_range)
    m = math.cos(theta) * r + math.sin(theta) * perp
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return ProtocolConfig(
        m=m / np.linalg.norm(m),
        purity=float(rng.uniform(0.0, 1.0)),
        r=r,
        A=0.5 * (M + M.conj().T),
        g=float(rng.uniform(-2 * math.pi, 2 * math.pi)),
        delta=float(rng.uniform(-math.pi, math.pi)),
        psi_i=ket(),
        psi_f=ket(),
    )


# -- operators ---------------------------------------------------------------


def build_gate(cfg: ProtocolConfig) -> np.ndarray:
    U_A = qmath.unitary_exp(cfg.A, cfg.g)
    return qmath.tensor_product(qmath.projector(cfg.r), qmath.I2) + np.exp(
        1j * cfg.delta
    ) * qmath.tensor_product(qmath.projector(-cfg.r), U_A)


def phase_shifter(r, xi: float) -> np.ndarray:
    """Pi_r + exp(-i xi) Pi_{-r}: delays the -r branch by xi."""
    return qmath.projector(r) + np.exp(-1j * xi) * qmath.projector(-np.asarray(r, dtype=float))


@dataclass(frozen=True, eq=False)
class MeterConfigs:
    q_re: np.ndarray
    q_im: np.ndarray


def meter_configs(m, r) -> MeterConfigs:
    """Final meter directions reading Re and Im of the modular value.

    q_re is the component of m orthogonal to r (coplanar with m and r),
    q_im is along r x m.
    """
    m = qmath.as_direction(m)
    r = qmath.as_direction(r)
    cross = np.cross(r, m)
    if np.linalg.norm(cross) < OVERLAP_TOL:
        raise CollinearConfigurationError("meter direction is collinear with the control axis")
    q_re = m - np.dot(m, r) * r
    return MeterConfigs(q_re=q_re / np.linalg.norm(q_re), q_im=cross / np.linalg.norm(cross))


# -- closed forms --------------------------------------------------------------


def effective_modular_value(cfg: ProtocolConfig) -> ComplexValue:
    """exp(i delta) A_m: the quantity the meter interferometer actually reads."""
    return ComplexValue(np.exp(1j * cfg.delta) * values.modular_value(cfg.A, cfg.g, cfg.psi_i, cfg.psi_f))


@dataclass(frozen=True)
class MeterAverage:
    average: float
    numerator: float
    denominator: float
    orthogonal_postselection: bool


def conditional_meter_statistics(cfg: ProtocolConfig, q, xi: float = 0.0) -> MeterAverage:
    """Closed-form conditional meter average and its numerator/denominator.

    For exactly (or nearly) orthogonal post-selection the modular value is not
    formed; both parts are multiplied by |<f|i>|^2 and evaluated directly.
    """
    q = qmath.as_direction(q)
    if abs(float(np.dot(q, cfg.r))) > ERASER_TOL:
        raise EraserConditionError(f"final meter direction must be orthogonal to r (q.r={np.dot(q, cfg.r):.3e})")
    P = cfg.purity
    cos_t = float(np.dot(cfg.r, cfg.m))
    mq = float(np.dot(cfg.m, q))
    rmq = float(np.dot(np.cross(cfg.r, cfg.m), q))
    rot = np.exp(1j * (cfg.delta - xi))
    if not cfg.orthogonal:
        a = rot * values.modular_value(cfg.A, cfg.g, cfg.psi_i, cfg.psi_f)
        num = 2 * P * (mq * a.real + rmq * a.imag)
        den = (1 + P * cos_t) + (1 - P * cos_t) * abs(a) ** 2
        return MeterAverage(num / den, num, den, False)
    U = qmath.unitary_exp(cfg.A, cfg.g)
    fi = cfg.overlap
    fui = complex(np.vdot(cfg.psi_f, U @ cfg.psi_i))
    w = rot * fui * fi.conjugate()
    num = 2 * P * (mq * w.real + rmq * w.imag)
    den = (1 + P * cos_t) * abs(fi) ** 2 + (1 - P * cos_t) * abs(fui) ** 2
    if den < 1e-30:
        raise NoPostselectionError("post-selected probe state is never detected")
    return MeterAverage(num / den, num, den, True)


def conditional_meter_average(cfg: ProtocolConfig, q, xi: float = 0.0) -> float:
    return conditional_meter_statistics(cfg, q, xi).average


def weak_estimate(avg_re: float, avg_im: float, theta: float) -> ComplexValue:
    """Weak-measurement reading of the modular value: averages divided by theta.

    Only meaningful for theta close to 0 and a nearly pure meter.
    """
    if theta == 0:
        raise DegenerateStrengthError("measurement strength theta must be non-zero")
    return ComplexValue(complex(avg_re / theta, avg_im / theta))


def coefficient_C(epsilon: float, purity: float) -> float:
    """(1+P)/2 + (1-P)/2 cot^2(epsilon/2)."""
    s = math.sin(0.5 * epsilon)
    if abs(s) < 1e-12:
        raise SingularCoefficientError(f"cot(epsilon/2) diverges at epsilon={epsilon!r}")
    cot2 = (math.cos(0.5 * epsilon) / s) ** 2
    return 0.5 * (1 + purity) + 0.5 * (1 - purity) * cot2


def _strength(theta):
    if not 0.0 < theta < math.pi:
        raise DegenerateStrengthError(f"theta must lie strictly between 0 and pi, got {theta!r}")
    return math.tan(0.5 * theta)


def visibility_closed_form(theta: float, purity: float, mod_Am: float) -> float:
    t = _strength(theta)
    if math.isinf(mod_Am):
        return 0.0
    c_t = coefficient_C(theta, purity)
    c_tp = coefficient_C(theta + math.pi, purity)
    return 2 * purity * t * mod_Am / (c_tp + c_t * t * t * mod_Am * mod_Am)


def max_visibility(theta: float, purity: float) -> float:
    """Largest visibility reachable at this strength (double root of the inversion)."""
    _strength(theta)
    return purity / math.sqrt(coefficient_C(theta, purity) * coefficient_C(theta + math.pi, purity))


class ModulusRoots(NamedTuple):
    minus: float
    plus: float


def modulus_from_visibility(V: float, theta: float, purity: float) -> ModulusRoots:
    """Both moduli compatible with a visibility V.

    The small root is evaluated as C_{t+pi} V / (P tan(t/2) (1 + sqrt(disc))),
    algebraically equal to the textbook form but free of cancellation.
    """
    t = _strength(theta)
    if not 0.0 <= V <= 1.0:
        raise InconsistentVisibilityError(f"visibility must lie in [0, 1], got {V!r}")
    if V == 0.0:
        return ModulusRoots(0.0, math.inf)
    if purity == 0.0:
        raise InconsistentVisibilityError("a maximally mixed meter shows no fringe")
    c_t = coefficient_C(theta, purity)
    c_tp = coefficient_C(theta + math.pi, purity)
    disc = 1.0 - c_t * c_tp * V * V / (purity * purity)
    if disc < 0:
        if disc < -DISC_CLAMP:
            raise InconsistentVisibilityError(
                f"visibility {V!r} exceeds the maximum {max_visibility(theta, purity)!r} for this strength and purity"
            )
        disc = 0.0
    root = math.sqrt(disc)
    plus = purity * (1 + root) / (c_t * t * V)
    minus = c_tp * V / (purity * t * (1 + root))
    return ModulusRoots(minus, plus)


def branch_criterion(theta: float, purity: float, mod_Am: float) -> float:
    """tan^2(t/2) C_t / C_{t+pi} |A_m|^2; <= 1 selects the minus root."""
    t = _strength(theta)
    return t * t * coefficient_C(theta, purity) / coefficient_C(theta + math.pi, purity) * mod_Am * mod_Am


def select_root(roots: ModulusRoots, criterion: float) -> float:
    return roots.minus if criterion <= 1.0 else roots.plus


# -- brute force ---------------------------------------------------------------


class JointOutcome(NamedTuple):
    avg: float
    p_q: float
    p_negq: float
    postselect_prob: float


def evolved_state(cfg: ProtocolConfig, xi: float = 0.0) -> np.ndarray:
    """Two-qubit density matrix after the gate and the meter phase shifter."""
    rho = np.kron(cfg.rho_m, qmath.ket_projector(cfg.psi_i))
    W = np.kron(phase_shifter(cfg.r, xi), qmath.I2) @ build_gate(cfg)
    return W @ rho @ W.conj().T


def joint_distribution(cfg: ProtocolConfig, q, xi: float = 0.0) -> np.ndarray:
    """Probabilities of (meter +-q) x (probe f, f-perp); rows index the meter outcome."""
    q = qmath.as_direction(q)
    rho = evolved_state(cfg, xi)
    f = np.asarray(cfg.psi_f)
    f_perp = np.array([-f[1].conjugate(), f[0].conjugate()])
    out = np.empty((2, 2))
    for a, meter in enumerate((qmath.projector(q), qmath.projector(-q))):
        for b, probe in enumerate((qmath.ket_projector(f), qmath.ket_projector(f_perp))):
            out[a, b] = np.trace(np.kron(meter, probe) @ rho).real
    return out


def bruteforce_conditional(cfg: ProtocolConfig, q, xi: float = 0.0) -> JointOutcome:
    """Oracle: evolve rho_m (x) |i><i| through the gate and measure directly."""
    q = qmath.as_direction(q)
    rho = evolved_state(cfg, xi)
    Pf = qmath.ket_projector(cfg.psi_f)
    p_q = float(np.trace(np.kron(qmath.projector(q), Pf) @ rho).real)
    p_negq = float(np.trace(np.kron(qmath.projector(-q), Pf) @ rho).real)
    total = p_q + p_negq
    if total < 1e-15:
        raise NoPostselectionError(f"post-selection probability {total:.3e} is zero")
    return JointOutcome((p_q - p_negq) / total, p_q, p_negq, total)


def no_eraser_ratio(cfg: ProtocolConfig) -> float:
    """p(-r|f)/p(r|f) with the meter read along the control axis itself."""
    out = bruteforce_conditional(cfg, cfg.r)
    if out.p_q == 0.0:
        return math.inf
    return out.p_negq / out.p_q


# -- interference ---------------------------------------------------------------


@dataclass(frozen=True)
class InterferenceResult:
    visibility: float
    phase: float
    p_max: float
    p_min: float
    postselect_prob: float
    fit: tuple = field(default=(), repr=False)


def fit_fringe(xi_values: Sequence[float], p_values: Sequence[float]):
    """Least-squares fit of p(xi) = c (1 + V cos(phi - xi)).

    Returns (c, V, phi, max_abs_residual). Exact for three distinct settings.
    """
    xi = np.asarray(xi_values, dtype=float)
    p = np.asarray(p_values, dtype=float)
    design = np.column_stack([np.ones_like(xi), np.cos(xi), np.sin(xi)])
    if xi.size < 3 or np.linalg.matrix_rank(design) < 3:
        raise ValueError("fringe fit needs at least three distinct phase settings")
    coef, *_ = np.linalg.lstsq(design, p, rcond=None)
    a, b, c = coef
    resid = float(np.max(np.abs(design @ coef - p)))
    amp = math.hypot(b, c)
    V = amp / a if a != 0 else 0.0
    return float(a), float(V), qmath.wrap_angle(math.atan2(c, b)), resid


def interference_scan(cfg: ProtocolConfig, xi_values: Sequence[float] = DEFAULT_XI, q=None) -> InterferenceResult:
    """Visibility and phase of the joint-detection fringe at the meter direction q_re.

    The fringe parameters come from a fit over ``xi_values``; the visibility is
    then re-evaluated from the extrema at the compensating setting xi = phi,
    where p(q) must be maximal and p(-q) minimal.
    """
    if q is None:
        q = meter_configs(cfg.m, cfg.r).q_re
    scans = [bruteforce_conditional(cfg, q, x) for x in xi_values]
    c, v_fit, phi, resid = fit_fringe(xi_values, [s.p_q for s in scans])
    if v_fit < 1e-12:
        # no fringe: the phase is undefined and reported as 0
        phi = 0.0
    if resid > 1e-8 * max(c, 1e-300):
        raise ModelViolationError(f"joint probability is not a pure fringe (residual {resid:.3e})")
    at_phi = bruteforce_conditional(cfg, q, phi)
    p_max, p_min = at_phi.p_q, at_phi.p_negq
    V = (p_max - p_min) / (p_max + p_min)
    slack = 1e-9 * at_phi.postselect_prob
    if abs(V - v_fit) > 1e-8 or any(s.p_q > p_max + slack or s.p_negq < p_min - slack for s in scans):
        raise ModelViolationError("compensating phase does not maximise p(q) and minimise p(-q)")
    return InterferenceResult(V, phi, p_max, p_min, at_phi.postselect_prob, fit=(c, v_fit, phi, resid))


@dataclass(frozen=True)
class PolarEstimate:
    value: ComplexValue
    visibility: float
    criterion: float
    branch: str
    roots: ModulusRoots


def polar_modular_value(cfg: ProtocolConfig, xi_values: Sequence[float] = DEFAULT_XI) -> PolarEstimate:
    """Modulus and argument of exp(i delta) A_m from the interferometer alone.

    Uses the fringe (visibility, phase) and the no-eraser count ratio to pick
    the root; the modular value itself is never computed.
    """
    scan = interference_scan(cfg, xi_values)
    roots = modulus_from_visibility(min(1.0, scan.visibility), cfg.theta, cfg.purity)
    crit = no_eraser_ratio(cfg)
    branch = "minus" if crit <= 1.0 else "plus"
    modulus = select_root(roots, crit)
    return PolarEstimate(ComplexValue.from_polar(modulus, scan.phase), scan.visibility, crit, branch, roots)


def weak_approximation(cfg: ProtocolConfig) -> ComplexValue:
    """Standard weak-measurement reading: meter averages at q_re and q_im over theta."""
    qs = meter_configs(cfg.m, cfg.r)
    avg_re = bruteforce_conditional(cfg, qs.q_re).avg
    avg_im = bruteforce_conditional(cfg, qs.q_im).avg
    return weak_estimate(avg_re, avg_im, cfg.theta)
