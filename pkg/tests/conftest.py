import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sightline.grid import MapGenSpec, generate_map, inflate


@pytest.fixture(scope="session")
def room_map():
    return generate_map(MapGenSpec(seed=3))


@pytest.fixture(scope="session")
def room_map_inflated(room_map):
    return inflate(room_map, 0.18)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
