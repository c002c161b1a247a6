import numpy as np
import pytest

from sta_anneal import ModelParams


@pytest.fixture
def params():
    return ModelParams(J=1.0, h=0.1, Gamma0=1.0, T=10.0, N=4000)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
