"""Shared fixtures for the rank-correlation test suites."""

import pytest

from modules.mixing import mixing_distribution as mixing
from modules.qmc.qmc_integrator import QmcConfig


@pytest.fixture
def small_cfg():
    """Cheap configuration for properties that hold exactly on shared nodes."""
    return QmcConfig(points=2 ** 10, replicates=4)


@pytest.fixture
def default_cfg():
    return QmcConfig()


@pytest.fixture
def ig4():
    """IG(2, 2): the mixing law of the t-type copulas with nu = 4."""
    return mixing.ig_from_dof(4.0)
