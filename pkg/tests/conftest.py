import random

import pytest

from clakalab.pairing import get_backend


@pytest.fixture(scope="session")
def t1009():
    return get_backend("t1009")


@pytest.fixture(scope="session")
def t256():
    return get_backend("t256")


@pytest.fixture(scope="session")
def c160():
    return get_backend("c160")


@pytest.fixture()
def rng():
    return random.Random(0xC1AC)
