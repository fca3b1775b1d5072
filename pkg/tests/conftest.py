"""Shared fixtures: the reference solve is reused across test modules."""

import pytest

from dimerwave.model import DimerParams
from dimerwave.nanopteron import solve_nanopteron

QUAD = DimerParams(kappa=2.0, beta=1.0, n1=(), n2=())


@pytest.fixture(scope="session")
def solved02():
    return solve_nanopteron(QUAD, 0.2)
