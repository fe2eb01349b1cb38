import numpy as np
import pytest
from scipy.integrate import solve_ivp

from su2pulse.su2 import SIGMA, sigma_q


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def ode_propagator(Jeff, field_fn, q, rtol=1e-12, atol=1e-13):
    """Independent oracle: integrate dU/dt = i (Jeff s3 + b(t) s_q) U with an adaptive RK solver."""
    sq = sigma_q(q)

    def rhs(t, y):
        U = y.reshape(2, 2)
        return (1j * (Jeff * SIGMA[3] + field_fn(t) * sq) @ U).ravel()

    sol = solve_ivp(rhs, (0.0, 1.0), np.eye(2, dtype=complex).ravel(), method="DOP853", rtol=rtol, atol=atol)
    return sol.y[:, -1].reshape(2, 2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
