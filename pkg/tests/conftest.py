import numpy as np
import pytest

from penningmd import (
    analyze_modes,
    default_nist_params,
    find_equilibrium,
    with_wall_frequency,
)


@pytest.fixture(scope="session")
def nist():
    species, trap = default_nist_params()
    return species, trap


@pytest.fixture(scope="session")
def trap204(nist):
    species, trap = nist
    return with_wall_frequency(trap, species, 2 * np.pi * 204e3, 0.25)


@pytest.fixture(scope="session")
def eq12(nist, trap204):
    """Small crystal reused across tests to keep the suite quick."""
    species, _ = nist
    return find_equilibrium(12, trap204, species)


@pytest.fixture(scope="session")
def dec12(nist, trap204, eq12):
    species, _ = nist
    return analyze_modes(eq12, trap204, species)


@pytest.fixture(scope="session")
def eq54_204(nist, trap204):
    species, _ = nist
    return find_equilibrium(54, trap204, species)
