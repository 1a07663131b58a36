import numpy as np
import pytest

from vlc_secrecy import (
    DriveConfig,
    IntensityField,
    OpticalFrontEnd,
    RoomConfig,
    Scenario,
    build_grid_layout,
    explicit_layout,
)


@pytest.fixture
def front_end():
    return OpticalFrontEnd()


@pytest.fixture
def drive():
    return DriveConfig()


@pytest.fixture
def two_fixture_scenario(front_end, drive):
    """8 x 8 m room, fixtures at (+-2.5, 0)."""
    room = RoomConfig(8.0, 8.0, 3.0)
    layout = explicit_layout([[2.5, 0.0], [-2.5, 0.0]])
    return Scenario(room, layout, front_end, drive, IntensityField.homogeneous(0.05))


@pytest.fixture
def grid_scenario(front_end, drive):
    """10 x 12 m room with a 4x4 grid and a 1 m edge zone."""
    room = RoomConfig(10.0, 12.0, 3.0)
    layout = build_grid_layout(room, 4, 4, 1.0)
    return Scenario(room, layout, front_end, drive, IntensityField.homogeneous(0.05))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
