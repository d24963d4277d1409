import numpy as np
import pytest

from shadowlab.montecarlo import RandomStream


@pytest.fixture
def gen():
    return np.random.default_rng(20261014)


@pytest.fixture
def stream():
    return RandomStream(seed=1234, stream_id=0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
