import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from pathslice import CosinePotential, gaussian_packet, make_grid, make_low_regularity_potential  # noqa: E402

settings.register_profile("pkg", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("pkg")


@pytest.fixture(scope="session")
def grid():
    return make_grid()


@pytest.fixture(scope="session")
def packet(grid):
    return gaussian_packet(grid)


@pytest.fixture(scope="session")
def acceptance_potentials():
    return {"cosine": lambda N: CosinePotential(1.0, 1.0), "low_regularity": lambda N: make_low_regularity_potential(N, 64)}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
