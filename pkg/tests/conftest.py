import math

import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_ket(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_hermitian(rng):
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return 0.5 * (M + M.conj().T)


def triangle_solid_angle(a, b, c):
    """Signed solid angle of the geodesic triangle abc (Van Oosterom-Strackee)."""
    num = np.dot(a, np.cross(b, c))
    den = 1.0 + np.dot(a, b) + np.dot(b, c) + np.dot(c, a)
    return 2.0 * math.atan2(num, den)


def polygon_solid_angle(vertices):
    """Fan triangulation from the first vertex; defined modulo 4*pi."""
    v = [np.asarray(x, dtype=float) for x in vertices]
    return sum(triangle_solid_angle(v[0], v[k], v[k + 1]) for k in range(1, len(v) - 1))


def mod_distance(a, b, period):
    d = (a - b) % period
    return min(d, period - d)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
