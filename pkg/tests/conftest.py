import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pmericci.families import FlowEnv, FunctionTriple, PmeParameters
from pmericci.geometry import ManifoldModel
from pmericci.solver import initial_profile, solve

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def env_for_rate(pme, x, M=1.0, T=1.0):
    """Environment whose product (m-1) M K equals ``x``."""
    return FlowEnv(K=x / ((pme.m - 1.0) * M), M=M, T=T)


@pytest.fixture
def pme12():
    return PmeParameters(2.0, 1)


@pytest.fixture
def pme22():
    return PmeParameters(2.0, 2)


@pytest.fixture(scope="session")
def circle_trace():
    """Smooth positive run on the flat circle, snapshots every 0.05 up to 1."""
    model = ManifoldModel.circle(128)
    v0 = initial_profile(model, "sine", c=1.5, a=0.5)
    snaps = np.round(np.arange(1, 21) * 0.05, 12)
    return solve(model, v0, PmeParameters(2.0, 1), (0.0, 1.0), snaps)


@pytest.fixture(scope="session")
def sphere_trace():
    model = ManifoldModel.sphere(96, r0=2.0)
    v0 = initial_profile(model, "gaussian", base=1.0, amplitude=1.0, width=0.5)
    snaps = np.round(np.arange(1, 11) * 0.05, 12)
    return solve(model, v0, PmeParameters(2.0, 2), (0.0, 0.5), snaps)
