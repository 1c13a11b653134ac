"""
Shared fixtures: benchmark systems and their chain approximations.
"""

import math

import pytest

from src.chain.chain_system import build_chain
from src.model.benchmarks import HutchinsonConfig, make_coupled_oscillators, make_duffing, make_hutchinson

DUFFING = {"delta": 0.2, "alpha": 2.0, "beta": -4.0}
COUPLED = {"mu1": 0.015, "mu2": 0.035, "gamma": 0.3, "beta2": -0.1, "tau_d": 0.5}


@pytest.fixture(scope="session")
def duffing_pre():
    return make_duffing(tau_d=1.0, **DUFFING)


@pytest.fixture(scope="session")
def duffing_post():
    return make_duffing(tau_d=1.1, **DUFFING)


@pytest.fixture(scope="session")
def duffing_post_chain(duffing_post):
    return build_chain(duffing_post, 100)


@pytest.fixture(scope="session")
def coupled_pre():
    return make_coupled_oscillators(beta1=-0.3, **COUPLED)


@pytest.fixture(scope="session")
def hutchinson_post():
    return make_hutchinson(HutchinsonConfig(M=4, d=1.0, a=math.pi / 2 + 0.05))
