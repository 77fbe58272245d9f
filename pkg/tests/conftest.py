import numpy as np
import pytest

from routhsim.systems import (dsp_reduced, dsp_system, satellite_reduced,
                              satellite_system)

INCLINATION = 0.3


@pytest.fixture(scope="session")
def satellite():
    return satellite_system(0.0)


@pytest.fixture(scope="session")
def satellite_j2():
    return satellite_system(0.05)


@pytest.fixture(scope="session")
def satellite_red():
    return satellite_reduced(0.0)


@pytest.fixture(scope="session")
def satellite_red_j2():
    return satellite_reduced(0.05)


@pytest.fixture(scope="session")
def dsp():
    return dsp_system()


@pytest.fixture(scope="session")
def dsp_red():
    return dsp_reduced()


@pytest.fixture(scope="session")
def circular_ic():
    """Inclined circular orbit of the spherical potential at r = 1."""
    q0 = np.array([1.0, 0.0, 0.0])
    qdot0 = np.array([0.0, np.cos(INCLINATION), np.sin(INCLINATION)])
    return q0, qdot0


@pytest.fixture(scope="session")
def dsp_ic(dsp, dsp_red):
    """Gentle motion near the mu = 0.5 relative equilibrium, plus the
    matched full-space initial condition."""
    mu = np.array([0.5])
    x0 = np.array([0.19538024, 0.22858555, 0.1])
    xdot0 = np.array([0.01, 0.02, 0.05])
    xi = mu[0] / dsp_red.locked_inertia(x0) - (dsp_red.connection_A(x0) @ xdot0).item()
    q0 = dsp.from_shape(x0, np.zeros(1))
    qdot0 = dsp.shape_jacobian() @ xdot0 + xi * dsp.group_generators()[0]
    return mu, x0, xdot0, q0, qdot0
