import numpy as np
import pytest

from realmoments.reshape import BipartiteDims
from realmoments.states import random_density, random_separable

DIMS = [BipartiteDims(2, 2), BipartiteDims(2, 3), BipartiteDims(3, 2), BipartiteDims(3, 3)]


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def small_ensemble():
    """A few dozen Ginibre and separable states per dimension pair."""
    states = []
    for dims in DIMS:
        for seed in range(25):
            states.append(random_density(dims, seed))
            states.append(random_separable(dims, 1 + seed % 4, seed))
    return states


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
