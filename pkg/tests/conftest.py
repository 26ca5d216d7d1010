import random

import pytest

from takiff.rational import random_q as rand_q  # noqa: F401


@pytest.fixture
def rng():
    return random.Random(20240611)
