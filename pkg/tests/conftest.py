import numpy as np
import pytest

from midpoint_vi.problems import cosh_lagrangian, harmonic_oscillator, make_mechanical, pendulum


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def harmonic():
    return make_mechanical(harmonic_oscillator())


@pytest.fixture
def pendulum_L():
    return make_mechanical(pendulum())


@pytest.fixture
def cosh_L():
    return cosh_lagrangian()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
