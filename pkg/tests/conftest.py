from functools import lru_cache

import numpy as np
import pytest

from weylkit import catalog, compute_geometry

ACCEPTANCE_LINES = []


@lru_cache(maxsize=None)
def _geometry(name, point):
    return compute_geometry(catalog(name), np.array(point))


@pytest.fixture
def geom():
    """``geom("schwarzschild", (0, 4, 1.2, 0.3))`` with caching across tests."""
    return lambda name, point: _geometry(name, tuple(float(x) for x in point))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
