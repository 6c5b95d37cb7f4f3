import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from qeraser import protocol, qmath, values
from qeraser.errors import (
    CollinearConfigurationError,
    DegenerateStrengthError,
    EraserConditionError,
    InconsistentVisibilityError,
    SingularCoefficientError,
)

from conftest import mod_distance, random_unit

THETA2, P2 = 0.297 * math.pi, 0.836


def test_gate_identity_and_cnot():
    cfg = protocol.cnot_config(0.3, 1.0, 0.2).replace(g=0.0, delta=0.0)
    assert np.allclose(protocol.build_gate(cfg), np.eye(4))
    U = protocol.build_gate(protocol.cnot_config(0.3, 1.0, 0.2))
    cnot = np.kron(np.diag([1, 0]), np.eye(2)) + np.kron(np.diag([0, 1]), qmath.SIGMA_X)
    assert np.allclose(U, cnot, atol=1e-15)


def test_gate_unitary_random(rng):
    for _ in range(1000):
        U = protocol.build_gate(protocol.random_config(rng))
        assert np.allclose(U.conj().T @ U, np.eye(4), atol=1e-12)


def test_meter_configs_examples():
    th = 0.4
    qs = protocol.meter_configs((math.sin(th), 0, math.cos(th)), (0, 0, 1))
    assert np.allclose(qs.q_re, (1, 0, 0)) and np.allclose(qs.q_im, (0, 1, 0))
    with pytest.raises(CollinearConfigurationError):
        protocol.meter_configs((0, 0, 1), (0, 0, 1))
    qs = protocol.meter_configs((0.6, 0.8, 0), (0, 0, 1))
    assert np.allclose(qs.q_re, (0.6, 0.8, 0))


def test_meter_configs_orthonormal(rng):
    for _ in range(500):
        m, r = random_unit(rng), random_unit(rng)
        qs = protocol.meter_configs(m, r)
        for q in (qs.q_re, qs.q_im):
            assert abs(np.linalg.norm(q) - 1) < 1e-12 and abs(q @ r) < 1e-12
        assert qs.q_re @ m >= 0 and qs.q_im @ np.cross(r, m) > 0


def test_collinear_meter_gives_zero_average():
    # m = r: no which-path information in the eraser plane, checked on the oracle
    cfg = protocol.cnot_config(0.0, 0.9, 0.3)
    assert abs(protocol.bruteforce_conditional(cfg, (1, 0, 0)).avg) < 1e-15
    assert abs(protocol.bruteforce_conditional(cfg, (0, 1, 0)).avg) < 1e-15


def test_zero_coupling_average(rng):
    for _ in range(200):
        cfg = protocol.random_config(rng).replace(g=0.0, delta=0.0)
        q = protocol.meter_configs(cfg.m, cfg.r).q_re
        expected = cfg.purity * (cfg.m @ q)
        assert abs(protocol.conditional_meter_average(cfg, q) - expected) < 1e-12
        assert abs(protocol.bruteforce_conditional(cfg, q).avg - expected) < 1e-12


def test_closed_form_matches_bruteforce(rng):
    for _ in range(1000):
        cfg = protocol.random_config(rng)
        qs = protocol.meter_configs(cfg.m, cfg.r)
        for q in (qs.q_re, qs.q_im):
            avg = protocol.conditional_meter_average(cfg, q)
            assert abs(avg - protocol.bruteforce_conditional(cfg, q).avg) < 1e-10
            assert -1 - 1e-12 <= avg <= 1 + 1e-12


def test_cnot_presets_match_bruteforce():
    for theta, P in ((0.499 * math.pi, 0.882), (THETA2, P2), (0.092 * math.pi, 0.956)):
        for alpha in np.linspace(0, math.pi, 37)[:-1]:
            cfg = protocol.cnot_config(theta, P, alpha)
            if cfg.orthogonal:
                continue
            q = protocol.meter_configs(cfg.m, cfg.r).q_re
            assert abs(protocol.conditional_meter_average(cfg, q) - protocol.bruteforce_conditional(cfg, q).avg) < 1e-10


def test_joint_distribution_complete(rng):
    for _ in range(500):
        cfg = protocol.random_config(rng)
        q = protocol.meter_configs(cfg.m, cfg.r).q_im
        p = protocol.joint_distribution(cfg, q, rng.uniform(0, 6.3))
        assert abs(p.sum() - 1) < 1e-12 and p.min() >= -1e-15


def test_eraser_guard_and_negative_control(rng):
    cfg = protocol.random_config(rng)
    qs = protocol.meter_configs(cfg.m, cfg.r)
    tilted = qs.q_re * math.cos(0.4) + cfg.r * math.sin(0.4)
    with pytest.raises(EraserConditionError):
        protocol.conditional_meter_average(cfg, tilted)
    # evaluate the eraser formula by hand on the tilted direction: the oracle disagrees
    mismatches = 0
    for _ in range(200):
        cfg = protocol.random_config(rng)
        qs = protocol.meter_configs(cfg.m, cfg.r)
        q = qs.q_re * math.cos(0.4) + cfg.r * math.sin(0.4)
        a = protocol.effective_modular_value(cfg)
        P, c = cfg.purity, cfg.m @ cfg.r
        formula = 2 * P * ((cfg.m @ q) * a.real + (np.cross(cfg.r, cfg.m) @ q) * a.imag)
        formula /= (1 + P * c) + (1 - P * c) * abs(a) ** 2
        if abs(formula - protocol.bruteforce_conditional(cfg, q).avg) > 1e-6:
            mismatches += 1
    assert mismatches > 150


def test_orthogonal_postselection_limit():
    cfg = protocol.cnot_config(THETA2, P2, math.pi / 2)
    assert cfg.orthogonal
    stats = protocol.conditional_meter_statistics(cfg, (1, 0, 0))
    assert stats.orthogonal_postselection
    assert abs(stats.average - protocol.bruteforce_conditional(cfg, (1, 0, 0)).avg) < 1e-12


def test_weak_estimate():
    assert protocol.weak_estimate(0.0, 0.0, 0.1) == 0
    with pytest.raises(DegenerateStrengthError):
        protocol.weak_estimate(0.1, 0.1, 0.0)


@pytest.mark.parametrize("alpha, bound, close", [(math.pi / 6, 0.05, True), (0.45 * math.pi, 0.20, False)])
def test_weak_estimate_baseline(alpha, bound, close):
    cfg = protocol.cnot_config(0.025 * math.pi, 0.982, alpha)
    qs = protocol.meter_configs(cfg.m, cfg.r)
    avg = [protocol.bruteforce_conditional(cfg, q).avg for q in (qs.q_re, qs.q_im)]
    est = protocol.weak_estimate(*avg, cfg.theta)
    rel = abs(est - math.tan(alpha)) / math.tan(alpha)
    assert (rel < bound) if close else (rel > bound)


def test_weak_limit_consistency(rng):
    for _ in range(300):
        theta = rng.uniform(0.001, 0.01) * math.pi
        cfg = protocol.random_config(rng, theta_range=(theta, theta)).replace(purity=1.0)
        a = protocol.effective_modular_value(cfg)
        if not 1e-3 < abs(a) <= 1:
            continue
        qs = protocol.meter_configs(cfg.m, cfg.r)
        est = protocol.weak_estimate(
            protocol.conditional_meter_average(cfg, qs.q_re), protocol.conditional_meter_average(cfg, qs.q_im), cfg.theta
        )
        assert abs(est - a) <= 0.05 * abs(a)
        V = protocol.visibility_closed_form(cfg.theta, 1.0, abs(a))
        assert abs(V / cfg.theta - abs(a)) <= 0.05 * abs(a)


def test_phase_shifter():
    assert np.allclose(protocol.phase_shifter((0, 0, 1), 0.0), np.eye(2))
    assert np.allclose(protocol.phase_shifter((0, 0, 1), math.pi), qmath.SIGMA_Z)


@settings(max_examples=200, deadline=None)
@given(st.floats(-7, 7), st.floats(-7, 7), st.floats(-1, 1), st.floats(-1, 1), st.floats(0.1, 1))
def test_phase_shifter_composes(a, b, x, y, z):
    r = np.array([x, y, z]) / math.sqrt(x * x + y * y + z * z)
    R = protocol.phase_shifter
    assert np.allclose(R(r, a) @ R(r, b), R(r, a + b), atol=1e-12)
    assert qmath.is_unitary(R(r, a))


def test_coefficient_examples():
    for eps in (0.3, 1.0, math.pi, 5.0):
        assert protocol.coefficient_C(eps, 1.0) == pytest.approx(1.0)
    assert protocol.coefficient_C(math.pi, 0.4) == pytest.approx(0.7, abs=1e-15)
    with pytest.raises(SingularCoefficientError):
        protocol.coefficient_C(0.0, 0.5)


def test_coefficient_ratio_identity(rng):
    for _ in range(1000):
        th, P = rng.uniform(0.01, math.pi - 0.01), rng.uniform(0, 1)
        lhs = math.tan(th / 2) ** 2 * protocol.coefficient_C(th, P) / protocol.coefficient_C(th + math.pi, P)
        rhs = (1 - P * math.cos(th)) / (1 + P * math.cos(th))
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_visibility_examples():
    assert protocol.visibility_closed_form(0.3, 0.5, 0.0) == 0.0
    assert protocol.visibility_closed_form(math.pi / 2, 1.0, 1.0) == pytest.approx(1.0)
    with pytest.raises(DegenerateStrengthError):
        protocol.visibility_closed_form(0.0, 0.5, 1.0)


def _swept_visibility(cfg):
    # scan the compensating phase on the oracle, no closed forms involved
    q = protocol.meter_configs(cfg.m, cfg.r).q_re
    grid = np.linspace(0, 2 * math.pi, 721)
    pq = [protocol.bruteforce_conditional(cfg, q, x).p_q for x in grid]
    k = int(np.argmax(pq))
    res = minimize_scalar(
        lambda x: -protocol.bruteforce_conditional(cfg, q, x).p_q,
        bounds=(grid[max(k - 1, 0)], grid[min(k + 1, 720)]),
        method="bounded",
        options={"xatol": 1e-12},
    )
    out = protocol.bruteforce_conditional(cfg, q, res.x)
    return (out.p_q - out.p_negq) / (out.p_q + out.p_negq)


def test_visibility_against_phase_sweep():
    cfg = protocol.cnot_config(THETA2, P2, math.pi / 3)
    swept = _swept_visibility(cfg)
    closed = protocol.visibility_closed_form(THETA2, P2, math.tan(math.pi / 3))
    assert closed == pytest.approx(swept, abs=1e-9)
    # frozen from the sweep above
    assert closed == pytest.approx(0.7744194731148442, abs=1e-12)


def test_modulus_roots_examples():
    for mod in (0.5, 3.0):
        V = protocol.visibility_closed_form(THETA2, P2, mod)
        roots = protocol.modulus_from_visibility(V, THETA2, P2)
        got = protocol.select_root(roots, protocol.branch_criterion(THETA2, P2, mod))
        assert got == pytest.approx(mod, rel=1e-10)
    assert protocol.modulus_from_visibility(0.0, THETA2, P2) == (0.0, math.inf)


def test_double_root_at_maximum():
    Vmax = protocol.max_visibility(THETA2, P2)
    roots = protocol.modulus_from_visibility(Vmax, THETA2, P2)
    assert roots.minus == pytest.approx(roots.plus, rel=1e-6)
    star = math.sqrt((1 + P2 * math.cos(THETA2)) / (1 - P2 * math.cos(THETA2)))
    assert roots.minus == pytest.approx(star, rel=1e-6)
    assert protocol.visibility_closed_form(THETA2, P2, star) == pytest.approx(Vmax, rel=1e-14)
    with pytest.raises(InconsistentVisibilityError):
        protocol.modulus_from_visibility(Vmax + 1e-6, THETA2, P2)


def test_branch_criterion_equality_point():
    assert protocol.branch_criterion(THETA2, P2, 0.0) == 0.0
    star = math.sqrt((1 + P2 * math.cos(THETA2)) / (1 - P2 * math.cos(THETA2)))
    assert star == pytest.approx(1.727, abs=5e-4)
    assert protocol.branch_criterion(THETA2, P2, star) == pytest.approx(1.0, rel=1e-12)


def test_modulus_round_trip(rng):
    for _ in range(1000):
        th, P = rng.uniform(0.05, 0.95) * math.pi, rng.uniform(0.05, 1)
        mod = 10 ** rng.uniform(-2, 2)
        V = protocol.visibility_closed_form(th, P, mod)
        roots = protocol.modulus_from_visibility(V, th, P)
        assert protocol.select_root(roots, protocol.branch_criterion(th, P, mod)) == pytest.approx(mod, rel=1e-9)


def test_criterion_equals_no_eraser_ratio(rng):
    for _ in range(1000):
        cfg = protocol.random_config(rng)
        crit = protocol.branch_criterion(cfg.theta, cfg.purity, abs(protocol.effective_modular_value(cfg)))
        ratio = protocol.no_eraser_ratio(cfg)
        assert abs(crit - ratio) <= 1e-10 * max(1.0, ratio)


@pytest.mark.parametrize("alpha, phase", [(math.pi / 6, 0.0), (-math.pi / 6, math.pi)])
def test_interference_scan_examples(alpha, phase):
    cfg = protocol.cnot_config(THETA2, P2, alpha)
    scan = protocol.interference_scan(cfg)
    assert mod_distance(scan.phase, phase, 2 * math.pi) < 1e-9
    Am = values.modular_value(cfg.A, cfg.g, cfg.psi_i, cfg.psi_f)
    assert mod_distance(scan.phase, np.angle(1j * Am), 2 * math.pi) < 1e-9
    assert scan.visibility == pytest.approx(protocol.visibility_closed_form(THETA2, P2, abs(math.tan(alpha))), abs=1e-9)


def test_interference_scan_random(rng):
    for _ in range(300):
        cfg = protocol.random_config(rng)
        scan = protocol.interference_scan(cfg)
        a = protocol.effective_modular_value(cfg)
        assert scan.visibility == pytest.approx(protocol.visibility_closed_form(cfg.theta, cfg.purity, abs(a)), abs=1e-9)
        if scan.visibility > 1e-6:
            assert mod_distance(scan.phase, a.argument, 2 * math.pi) < 1e-9
        # a denser grid gives the same fringe
        dense = protocol.interference_scan(cfg, np.linspace(0, 2 * math.pi, 9)[:-1])
        assert dense.visibility == pytest.approx(scan.visibility, abs=1e-9)


def test_polar_pipeline_recovers_tan():
    for alpha in np.linspace(-1.5, 1.5, 31):
        est = protocol.polar_modular_value(protocol.cnot_config(THETA2, P2, alpha))
        assert est.value == pytest.approx(math.tan(alpha), abs=1e-8 * max(1, abs(math.tan(alpha))))


def test_polar_pipeline_near_orthogonal():
    alpha = math.pi / 2 - 1e-6
    est = protocol.polar_modular_value(protocol.cnot_config(THETA2, P2, alpha))
    assert est.branch == "plus"
    assert abs(est.value) == pytest.approx(math.tan(alpha), rel=1e-6)
