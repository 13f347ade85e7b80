import pytest

from trapmotion import OscillatorParams


@pytest.fixture
def params():
    """Dimensionless oscillator: mass = omega = hbar = 1."""
    return OscillatorParams.dimensionless()
