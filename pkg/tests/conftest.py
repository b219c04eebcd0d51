import numpy as np
import pytest

from uavpdc.channel import uca_halfwavelength
from uavpdc.detector import AngularGrid


@pytest.fixture(scope="session")
def array128():
    return uca_halfwavelength(128)


@pytest.fixture(scope="session")
def grid():
    return AngularGrid()


@pytest.fixture
def rng():
    return np.random.default_rng(4242)


def cn(rng, shape, var=1.0):
    """Circularly-symmetric complex Gaussian draws."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return np.sqrt(var / 2.0) * (z[..., 0] + 1j * z[..., 1])


# one line per acceptance criterion, echoed after the test summary so the
# PASS/FAIL verdicts survive pytest's output capture
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
