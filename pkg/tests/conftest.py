"""Shared fixtures: the robot preset, a small SISO plant and seeded generators."""
import numpy as np
import pytest

from src.factory import FactorGains, build_bezout_factors
from src.scenario import assemble, load_config
from src.sscore import NoiseSpec, StateSpaceModel, kalman_gain, lq_gain


@pytest.fixture
def rng():
    """Get consistent test results"""
    return np.random.default_rng(12345)


@pytest.fixture
def toy_plant():
    """Stable two-state SISO plant."""
    return StateSpaceModel.build(
        [[0.5, 0.1], [0.0, 0.3]],
        [[1.0], [0.5]],
        [[1.0, 0.0]],
        [[0.0]],
        Ts=0.1,
    )


@pytest.fixture
def toy_factors(toy_plant):
    F = lq_gain(toy_plant, np.eye(2), np.eye(1)).gain
    L = kalman_gain(toy_plant, NoiseSpec.isotropic(2, 1, 0.01)).gain
    return build_bezout_factors(toy_plant, FactorGains(F, L))


@pytest.fixture(scope="session")
def robotino_cfg():
    return load_config("robotino.nominal")


@pytest.fixture(scope="session")
def robotino(robotino_cfg):
    """Assembled nominal robot scenario (factors, MC parameters, post-filters)."""
    return assemble(robotino_cfg, seed=7)


@pytest.fixture(scope="session")
def robotino_factors(robotino):
    return robotino.factors
