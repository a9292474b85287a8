import numpy as np
import pytest

from torus_recur.exact_core import prepare

# Unimodular hyperbolic matrices; the last four need squaring.
MATRICES = [
    (2, 1, 1, 1),
    (1, 1, 1, 2),
    (3, 1, 2, 1),
    (2, 3, 1, 2),
    (3, 2, 1, 1),
    (4, 1, 3, 1),
    (1, 2, 1, 3),
    (2, 1, 3, 2),
    (5, 2, 2, 1),
    (7, 2, 3, 1),
    (1, 1, 1, 0),
    (0, 1, 1, 1),
    (-2, -1, -1, -1),
    (1, 2, 1, 1),
]

ACCEPTANCE = []


@pytest.fixture(scope="session")
def cat():
    spec, k = prepare((2, 1, 1, 1))
    assert k == 1
    return spec


@pytest.fixture(scope="session")
def logl(cat):
    return float(cat.log_lambda)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0][1:])):
        terminalreporter.write_line(line)
