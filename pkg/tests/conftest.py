import math

import pytest
from hypothesis import settings

from onticlab.construction import build_construction
from onticlab.interfero import MziConfig, build_mzi

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def mzi1():
    return build_mzi(MziConfig.figure(1))


@pytest.fixture(scope="session")
def mzi4():
    return build_mzi(MziConfig.figure(4))


@pytest.fixture(scope="session")
def half_construction():
    return build_construction(math.sqrt(0.5), math.sqrt(0.5), 2)
