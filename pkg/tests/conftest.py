import pytest
from hypothesis import settings

from leavitt import load_corpus

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fig1():
    return load_corpus("fig1")


@pytest.fixture(scope="session")
def fig3():
    return load_corpus("fig3")


@pytest.fixture(scope="session")
def ex57():
    return load_corpus("example57")
