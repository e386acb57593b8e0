import pytest

from eventclock import SpinExampleConfig, build_spin_example, gaussian_packet


@pytest.fixture(scope="session")
def spin_model():
    """Default two-spin scenario: a = 0, b = 1, T = 1, g = pi/T."""
    return build_spin_example(SpinExampleConfig())


@pytest.fixture(scope="session")
def standard_packet():
    """The standard arrival demo packet: Gaussian at x0 = -20, sigma = 2, p0 = 1."""
    return gaussian_packet(-20.0, 2.0, 1.0)
