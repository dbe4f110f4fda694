import math

import pytest

from atomwalk.dynamics import InitialCondition, MomentumGrid
from atomwalk.units import DriveParams, derive_recoil, get_species

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def yb():
    return get_species("Yb173")


@pytest.fixture(scope="session")
def scales(yb):
    return derive_recoil(yb)


@pytest.fixture(scope="session")
def strong_drive(scales):
    """Omega = 2pi x 1 MHz, Delta = 0, in omega_B units."""
    return scales.to_recoil(DriveParams(2 * math.pi * 1e6))


@pytest.fixture(scope="session")
def weak_drive(scales):
    """Omega = 2pi x 2 kHz, Delta = 0, in omega_B units."""
    return scales.to_recoil(DriveParams(2 * math.pi * 2e3))


@pytest.fixture
def ground():
    return InitialCondition(c0=1.0, c1=0.0, p_center=0.0, width=1.0)


@pytest.fixture
def excited():
    return InitialCondition(c0=0.0, c1=1.0, p_center=0.0, width=1.0)


@pytest.fixture
def grid():
    return MomentumGrid(-6.0, 6.0, 2048)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
