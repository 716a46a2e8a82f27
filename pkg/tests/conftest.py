import numpy as np
import pytest

from fockbic.coupling import QuadraticLoss

# resonator of the loss-curve and trajectory figures
WA = 1.47
BETA = 5e-6
KAPPA = 1e-3 * WA
GAMMA = 1e-2 * WA


def quadratic(n0, kappa_i=0.0, omega_a=WA, beta=BETA):
    """Quadratic loss with its zero at photon number ``n0`` (may be non-integer)."""
    return QuadraticLoss.from_waveguide(omega_a * (1 + 2 * beta * (n0 - 1)), KAPPA, GAMMA, kappa_i)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
