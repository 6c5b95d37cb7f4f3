"""Shot-noise emulation of the coincidence-count experiment.

Counts are binomial: for every post-selected probe detection the meter lands
on D1 (direction q, counted in N13) or D2 (direction -q, counted in N23).
Each (strength, alpha, xi) grid point draws from its own Philox stream keyed
by ``(seed, purpose, *indices)``, so results do not depend on evaluation order.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import protocol, qmath
from .errors import InvalidProbabilityError, NoFringeError

DEFAULT_SEED = 20151008
FIGURE_STRENGTHS = ((0.499 * math.pi, 0.882), (0.297 * math.pi, 0.836), (0.092 * math.pi, 0.956))
WEAK_BASELINE = (0.025 * math.pi, 0.982)

# stream purposes
_FRINGE, _NO_ERASER, _WEAK, _MONTECARLO, _PURITY = range(5)


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


@dataclass(frozen=True)
class CountRecord:
    xi: float
    n13: int
    n23: int

    def __post_init__(self):
        if self.n13 < 0 or self.n23 < 0:
            raise ValueError("coincidence counts must be non-negative")

    @property
    def n_total(self) -> int:
        return self.n13 + self.n23


def _generator(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        return rng_stream(*seed)
    return rng_stream(seed)


def sample_counts(p13: float, n_total: int, seed, xi: float = 0.0) -> CountRecord:
    """Split n_total post-selected events between D1 and D2.

    ``seed`` is an int, a key tuple for :func:`rng_stream`, or a Generator.
    """
    if not -1e-12 <= p13 <= 1 + 1e-12:
        raise InvalidProbabilityError(f"p13 must lie in [0, 1], got {p13!r}")
    p13 = min(1.0, max(0.0, p13))
    n13 = int(_generator(seed).binomial(n_total, p13))
    return CountRecord(xi, n13, n_total - n13)


def conditional_p13(cfg: protocol.ProtocolConfig, q, xi: float) -> float:
    out = protocol.bruteforce_conditional(cfg, q, xi)
    return out.p_q / out.postselect_prob


def raw_visibility(record: CountRecord) -> float:
    """(N13 - N23)/(N13 + N23) at a single (compensating) setting."""
    return (record.n13 - record.n23) / record.n_total


class VisibilityEstimate(NamedTuple):
    v_hat: float
    phi_hat: float
    stderr: float


def estimate_visibility_phase(records: Sequence[CountRecord]) -> VisibilityEstimate:
    """Fit n13/n(xi) = a + b cos xi + c sin xi and read V at the fitted extremum.

    At xi = phi the fitted D1 and D2 fractions are a + R and 1 - a - R with
    R = hypot(b, c), so V = 2(a + R) - 1. The error bar is sqrt((1 - V^2)/N)
    with N the mean number of events per setting.
    """
    xi = np.array([r.xi for r in records], dtype=float)
    n = np.array([r.n_total for r in records], dtype=float)
    if np.any(n <= 0):
        raise ValueError("every setting needs at least one event")
    frac = np.array([r.n13 for r in records], dtype=float) / n
    design = np.column_stack([np.ones_like(xi), np.cos(xi), np.sin(xi)])
    if np.linalg.matrix_rank(design) < 3:
        raise ValueError("phase grid must contain at least three distinct settings")
    w = np.sqrt(n)
    (a, b, c), *_ = np.linalg.lstsq(design * w[:, None], frac * w, rcond=None)
    amp = math.hypot(b, c)
    if amp <= 1e-12:
        raise NoFringeError()
    v_hat = min(1.0, max(0.0, 2 * (a + amp) - 1))
    phi_hat = qmath.wrap_angle(math.atan2(c, b))
    return VisibilityEstimate(v_hat, phi_hat, estimator_std(v_hat, float(n.mean())))


def snr(V: float, N: float) -> float:
    """V sqrt(N) / sqrt(1 - V^2); unbounded (inf) at V = 1."""
    if V >= 1.0:
        return math.inf
    return V / math.sqrt(1 - V * V) * math.sqrt(N)


def estimator_std(V: float, N: float) -> float:
    return math.sqrt(max(0.0, 1 - V * V) / N)


def fringe_records(cfg, q, xi_grid, counts: int, seed: int, key=()) -> list[CountRecord]:
    return [
        sample_counts(conditional_p13(cfg, q, x), counts, (seed, _FRINGE, *key, j), xi=x)
        for j, x in enumerate(xi_grid)
    ]


def montecarlo_records(V: float, N: int, trials: int, seed: int = DEFAULT_SEED) -> list[CountRecord]:
    """``trials`` independent runs of N events at the compensating setting.

    There p(2|3) = (1 - V)/2, so N23 ~ Binomial(N, (1 - V)/2).
    """
    p13 = 0.5 * (1 + V)
    return [sample_counts(p13, N, (seed, _MONTECARLO, k)) for k in range(trials)]


def montecarlo_visibility(V: float, N: int, trials: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    return np.array([raw_visibility(r) for r in montecarlo_records(V, N, trials, seed)])


# -- purity fit ---------------------------------------------------------------


@dataclass(frozen=True)
class PurityFit:
    purity: float
    chi2: float
    warning: str | None = None


def fit_purity(
    theta: float,
    measurements: Sequence[tuple],
    mod_Am_of_alpha: Callable[[float], float],
    xatol: float = 1e-5,
) -> PurityFit:
    """Chi-square fit of the meter purity to measured visibilities.

    ``measurements`` holds (alpha, V_hat) or (alpha, V_hat, N) tuples; without
    N every point gets the same event count.
    """
    if len(measurements) < 3:
        raise ValueError("purity fit needs at least three measurements")
    alphas, v_hat, weights = [], [], []
    for item in measurements:
        alpha, v = item[0], item[1]
        N = item[2] if len(item) > 2 else 1.0
        alphas.append(alpha)
        v_hat.append(v)
        weights.append(N / max(1.0 - v * v, 1e-12))
    mods = [mod_Am_of_alpha(a) for a in alphas]

    def chi2(P):
        return sum(
            w * (v - protocol.visibility_closed_form(theta, P, m)) ** 2 for v, m, w in zip(v_hat, mods, weights)
        )

    res = minimize_scalar(chi2, bounds=(0.0, 1.0), method="bounded", options={"xatol": xatol})
    P = float(res.x)
    warning = None
    if P < 10 * xatol or P > 1 - 10 * xatol:
        warning = f"purity fit hit the boundary of [0, 1] (P={P:.6f})"
    return PurityFit(P, float(res.fun), warning)


def synthetic_visibilities(theta, purity, alphas, counts, seed=DEFAULT_SEED):
    """Raw visibilities for the CNOT set-up, one compensating-setting run per alpha."""
    out = []
    for k, alpha in enumerate(alphas):
        cfg = protocol.cnot_config(theta, purity, alpha)
        scan = protocol.interference_scan(cfg)
        q = protocol.meter_configs(cfg.m, cfg.r).q_re
        rec = sample_counts(conditional_p13(cfg, q, scan.phase), counts, (seed, _PURITY, k), xi=scan.phase)
        out.append((alpha, raw_visibility(rec), counts))
    return out


# -- scenarios -----------------------------------------------------------------


def default_alpha_grid(step_deg: float = 1.0) -> tuple:
    """0..180 degrees, skipping 90 (orthogonal to the pre-selected |H>)."""
    n = int(round(180 / step_deg))
    return tuple(k * math.pi / n for k in range(n + 1) if 2 * k != n)


def default_xi_grid(points: int = 24) -> tuple:
    return tuple(2 * math.pi * j / points for j in range(points))


@dataclass(frozen=True)
class ScenarioSpec:
    preset: str = "custom"
    theta: tuple = ()
    purity: tuple = ()
    alpha_grid: tuple = field(default_factory=default_alpha_grid)
    counts_per_setting: int = 4000
    seed: int = DEFAULT_SEED
    xi_grid: tuple = field(default_factory=default_xi_grid)
    baseline_theta: float = WEAK_BASELINE[0]
    baseline_purity: float = WEAK_BASELINE[1]
    noiseless: bool = False

    def __post_init__(self):
        if self.preset not in ("figure2", "figure3", "custom"):
            raise ValueError(f"unknown preset {self.preset!r}")
        for name in ("theta", "purity", "alpha_grid", "xi_grid"):
            val = getattr(self, name)
            val = (val,) if isinstance(val, (int, float)) else val
            object.__setattr__(self, name, tuple(float(x) for x in val))
        if len(self.theta) != len(self.purity):
            raise ValueError("theta and purity must list the same number of strengths")
        if not self.alpha_grid:
            raise ValueError("alpha_grid must not be empty")
        if self.counts_per_setting < 1:
            raise ValueError("counts_per_setting must be at least 1")

    @classmethod
    def figure2(cls, **overrides) -> "ScenarioSpec":
        kw = dict(preset="figure2", theta=[t for t, _ in FIGURE_STRENGTHS], purity=[p for _, p in FIGURE_STRENGTHS])
        kw.update(overrides)
        return cls(**kw)

    @classmethod
    def figure3(cls, **overrides) -> "ScenarioSpec":
        kw = dict(preset="figure3", theta=[t for t, _ in FIGURE_STRENGTHS], purity=[p for _, p in FIGURE_STRENGTHS])
        kw.update(overrides)
        return cls(**kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), allow_nan=True)
        return hashlib.sha256(blob.encode()).hexdigest()


class Table(NamedTuple):
    name: str
    columns: tuple
    rows: list


FIGURE2_COLUMNS = ("alpha_rad", "V_theory", "V_sampled", "arg_rad", "criterion")
FIGURE3_COLUMNS = ("alpha_rad", "wv_exact", "wv_polar", "wv_weakapprox")


def _strength_label(k: int) -> str:
    return f"theta{k + 1}"


def run_figure2(spec: ScenarioSpec) -> list[Table]:
    """Visibility, argument and branch criterion against the post-selection angle."""
    tables = []
    for s, (theta, P) in enumerate(zip(spec.theta, spec.purity)):
        rows = []
        for a, alpha in enumerate(spec.alpha_grid):
            cfg = protocol.cnot_config(theta, P, alpha)
            scan = protocol.interference_scan(cfg)
            v_theory = protocol.visibility_closed_form(theta, P, abs(math.tan(alpha)))
            if spec.noiseless:
                v_sampled = scan.visibility
            else:
                q = protocol.meter_configs(cfg.m, cfg.r).q_re
                recs = fringe_records(cfg, q, spec.xi_grid, spec.counts_per_setting, spec.seed, (s, a))
                try:
                    v_sampled = estimate_visibility_phase(recs).v_hat
                except NoFringeError as exc:
                    v_sampled = exc.v_hat
            rows.append((alpha, v_theory, v_sampled, scan.phase, protocol.no_eraser_ratio(cfg)))
        tables.append(Table(f"figure2_{_strength_label(s)}", FIGURE2_COLUMNS, rows))
    return tables


def _sampled_polar(cfg, spec: ScenarioSpec, key) -> float:
    theta, P = cfg.theta, cfg.purity
    q = protocol.meter_configs(cfg.m, cfg.r).q_re
    try:
        est = estimate_visibility_phase(fringe_records(cfg, q, spec.xi_grid, spec.counts_per_setting, spec.seed, key))
    except NoFringeError:
        return 0.0
    v = min(est.v_hat, protocol.max_visibility(theta, P))
    if v == 0.0:
        return 0.0
    roots = protocol.modulus_from_visibility(v, theta, P)
    rec = sample_counts(conditional_p13(cfg, cfg.r, 0.0), spec.counts_per_setting, (spec.seed, _NO_ERASER, *key))
    crit = math.inf if rec.n13 == 0 else rec.n23 / rec.n13
    return protocol.select_root(roots, crit) * math.cos(est.phi_hat)


def _sampled_weak(cfg, spec: ScenarioSpec, key) -> float:
    q = protocol.meter_configs(cfg.m, cfg.r).q_re
    rec = sample_counts(conditional_p13(cfg, q, 0.0), spec.counts_per_setting, (spec.seed, _WEAK, *key))
    return raw_visibility(rec) / cfg.theta


def run_figure3(spec: ScenarioSpec) -> list[Table]:
    """Weak values from the polar procedure next to the weak-measurement baseline.

    The polar weak value is reported as |value| cos(arg), valid here because the
    argument is 0 or pi for real post-selection angles.
    """
    baseline = []
    for a, alpha in enumerate(spec.alpha_grid):
        cfg = protocol.cnot_config(spec.baseline_theta, spec.baseline_purity, alpha)
        if spec.noiseless:
            baseline.append(protocol.weak_approximation(cfg).real)
        else:
            baseline.append(_sampled_weak(cfg, spec, (a,)))
    tables = []
    for s, (theta, P) in enumerate(zip(spec.theta, spec.purity)):
        rows = []
        for a, alpha in enumerate(spec.alpha_grid):
            cfg = protocol.cnot_config(theta, P, alpha)
            if spec.noiseless:
                est = protocol.polar_modular_value(cfg).value
                polar = est.modulus * math.cos(est.argument)
            else:
                polar = _sampled_polar(cfg, spec, (s, a))
            rows.append((alpha, math.tan(alpha), polar, baseline[a]))
        tables.append(Table(f"figure3_{_strength_label(s)}", FIGURE3_COLUMNS, rows))
    return tables
