import numpy as np
import pytest

from biholo.linalg import norm


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_vector(rng, n, radius=None):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if radius is not None:
        v *= radius / norm(v)
    return v


def fd_jacobian(f, z, h=1e-5):
    """Central differences along the real coordinate directions of z."""
    n = len(z)
    cols = []
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = h
        cols.append((f.eval(z + e) - f.eval(z - e)) / (2 * h))
    return np.array(cols).T


def fd_second(f, z, x, h=1e-4):
    """d^2/dt^2 f(z + t x) at t = 0 by central second differences."""
    return (f.eval(z + h * x) - 2 * f.eval(z) + f.eval(z - h * x)) / h**2


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1.0))


# One line per acceptance criterion, repeated in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
