"""Shared fixtures: the default algebra is immutable, so build it once."""

import pytest

from rcc8.algebra import default_algebra


@pytest.fixture(scope="session")
def algebra():
    return default_algebra()
