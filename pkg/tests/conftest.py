import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

P_GRID = (0.5, 1.0, 3.0, 10.0)
ALPHA_GRID = (-0.5, 0.0, 0.5)
BETA_GRID = (-0.9, 0.0, 0.5, 0.9)


def arma_grid():
    return [(P, a, b) for P in P_GRID for a in ALPHA_GRID for b in BETA_GRID]


def arma1_autocovariance(alpha, beta, max_lag):
    """Closed-form autocovariance of ``Z_i + beta Z_{i-1} = U_i + alpha U_{i-1}``."""
    g = np.empty(max_lag + 1)
    g[0] = (1 + alpha**2 - 2 * alpha * beta) / (1 - beta**2)
    if max_lag >= 1:
        g[1] = (alpha - beta) * (1 - alpha * beta) / (1 - beta**2)
        for k in range(2, max_lag + 1):
            g[k] = -beta * g[k - 1]
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
