import numpy as np
import pytest

from hexactrl.model import AirframeParams


@pytest.fixture
def params():
    return AirframeParams()


@pytest.fixture
def weight(params):
    return params.mass_kg * params.gravity_mps2


def lift_box_vertices(K, count=6):
    """All 2**count corners of the lift box."""
    bits = (np.arange(2**count)[:, None] >> np.arange(count)) & 1
    return K * bits.astype(float)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
