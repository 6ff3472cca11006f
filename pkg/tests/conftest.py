import numpy as np
import pytest

from acsheet.grid_noise import make_grid

VERDICTS = []


@pytest.fixture
def small_grid():
    return make_grid(1.0, 32, 0.0, 1.0, 1e-3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(VERDICTS, key=lambda s: int(s.split()[0][1:])):
        terminalreporter.write_line(line)
