"""Shared fixtures for the roadmap-bounds test suite"""

import sys

import numpy as np
import pytest
from loguru import logger

from roadmap_bounds.geometry.environment import Box, Environment, make_hallway


@pytest.fixture(autouse=True)
def quiet_logger():
    """Warnings only on stderr; CLI tests reconfigure and this resets them"""
    logger.remove()
    logger.add(sys.stderr, level="WARNING", format="{level} | {message}")
    yield
    logger.remove()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def hallway_2d():
    return make_hallway(2, 0.25)


@pytest.fixture
def hallway_3d():
    return make_hallway(3, 0.125)


@pytest.fixture
def unit_square():
    return Environment(dim=2, boxes=(Box(lo=(0.0, 0.0), hi=(1.0, 1.0)),))


@pytest.fixture
def l_shape():
    """[0, 2] x [0, 1] plus [0, 1] x [1, 2]; the boxes meet only along shared faces"""
    return Environment(
        dim=2,
        boxes=(
            Box(lo=(0.0, 0.0), hi=(1.0, 1.0)),
            Box(lo=(1.0, 0.0), hi=(2.0, 1.0)),
            Box(lo=(0.0, 1.0), hi=(1.0, 2.0)),
        ),
    )
