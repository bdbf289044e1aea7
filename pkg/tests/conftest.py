"""Shared fixtures for the test suite."""

import pytest

from magopt import SystemParams, TransverseGrid


@pytest.fixture()
def params():
    """Default parameter point: delta=-8.6, b0=80, T=150 uK, 100 um."""
    return SystemParams()


@pytest.fixture()
def grid4(params):
    """Four lattice periods at N=256, the standard simulation box."""
    return TransverseGrid(n=256, length=4 * params.lattice_period)


@pytest.fixture()
def grid64(params):
    """Sixty-four lattice periods: the lattice mode sits near the top
    of the de-aliased band, which keeps it the fastest-growing density
    mode above threshold."""
    return TransverseGrid(n=256, length=64 * params.lattice_period)
