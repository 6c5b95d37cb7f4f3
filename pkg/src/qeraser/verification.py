"""Randomised equivalence checks between closed forms and independent routes.

Each suite draws ``trials`` random cases from a seeded generator and stops at
the first counterexample, which is returned in JSON-serialisable form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import bloch, protocol, qmath, values


@dataclass
class SuiteResult:
    name: str
    passed: bool
    trials: int
    counterexample: dict | None = None


def _unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def eq3_vs_bruteforce(rng, trials, tol=1e-10):
    for _ in range(trials):
        cfg = protocol.random_config(rng)
        qs = protocol.meter_configs(cfg.m, cfg.r)
        for label, q in (("q_re", qs.q_re), ("q_im", qs.q_im)):
            closed = protocol.conditional_meter_average(cfg, q)
            brute = protocol.bruteforce_conditional(cfg, q).avg
            if abs(closed - brute) > tol:
                return {"config": cfg.describe(), "q": label, "closed_form": closed, "bruteforce": brute}
    return None


def readout_orientation(rng, trials, tol=1e-10):
    """Meter averages at q_re / q_im read Re / Im of exp(i delta) A_m with the expected sign."""
    for _ in range(trials):
        cfg = protocol.random_config(rng)
        qs = protocol.meter_configs(cfg.m, cfg.r)
        a = protocol.effective_modular_value(cfg)
        P, c = cfg.purity, math.cos(cfg.theta)
        scale = 2 * P * math.sin(cfg.theta) / ((1 + P * c) + (1 - P * c) * abs(a) ** 2)
        got = (protocol.bruteforce_conditional(cfg, qs.q_re).avg, protocol.bruteforce_conditional(cfg, qs.q_im).avg)
        want = (scale * a.real, scale * a.imag)
        if max(abs(g - w) for g, w in zip(got, want)) > tol:
            return {"config": cfg.describe(), "averages": list(got), "expected": list(want)}
    return None


def modulus_roundtrip(rng, trials, tol=1e-9):
    for _ in range(trials):
        theta = rng.uniform(0.05 * math.pi, 0.95 * math.pi)
        P = rng.uniform(0.05, 1.0)
        mod = 10 ** rng.uniform(-2, 2)
        V = protocol.visibility_closed_form(theta, P, mod)
        roots = protocol.modulus_from_visibility(V, theta, P)
        got = protocol.select_root(roots, protocol.branch_criterion(theta, P, mod))
        if abs(got - mod) > tol * mod:
            return {"theta": theta, "purity": P, "modulus": mod, "recovered": got}
    return None


def geometric_phase(rng, trials, tol=1e-9, guard=1e-6):
    done = 0
    while done < trials:
        i, n, f = _unit(rng), _unit(rng), _unit(rng)
        si, sn, sf = (qmath.state_from_bloch(v) for v in (i, n, f))
        loop = [si, sn, qmath.state_from_bloch(bloch.mirror_image(i, n)), sf]
        edges = [abs(np.vdot(loop[(k + 1) % 4], loop[k])) for k in range(4)]
        if min(edges) < guard or abs(np.vdot(sf, qmath.pauli_along(n) @ si)) < guard:
            continue
        done += 1
        direct = values.weak_value(qmath.pauli_along(n), si, sf).argument
        formula = bloch.weak_argument_geometric(i, n, f)
        area = bloch.weak_argument_solid_angle(i, n, f)
        if max(abs(qmath.angle_diff(direct, formula)), abs(qmath.angle_diff(direct, area))) > tol:
            return {"i": i.tolist(), "n": n.tolist(), "f": f.tolist(), "direct": direct, "arctan": formula, "solid_angle": area}
    return None


def criterion_vs_ratio(rng, trials, tol=1e-10):
    for _ in range(trials):
        cfg = protocol.random_config(rng)
        mod = abs(protocol.effective_modular_value(cfg))
        crit = protocol.branch_criterion(cfg.theta, cfg.purity, mod)
        ratio = protocol.no_eraser_ratio(cfg)
        if abs(crit - ratio) > tol * max(1.0, ratio):
            return {"config": cfg.describe(), "criterion": crit, "ratio": ratio}
    return None


SUITES: dict[str, Callable] = {
    "eq3_vs_bruteforce": eq3_vs_bruteforce,
    "meter_readout_orientation": readout_orientation,
    "modulus_roundtrip": modulus_roundtrip,
    "geometric_phase": geometric_phase,
    "criterion_vs_no_eraser_ratio": criterion_vs_ratio,
}


def run_all(trials: int = 1000, seed: int = 0) -> list[SuiteResult]:
    results = []
    for k, (name, suite) in enumerate(SUITES.items()):
        rng = np.random.default_rng([seed, k])
        bad = suite(rng, trials)
        results.append(SuiteResult(name, bad is None, trials, bad))
    return results
