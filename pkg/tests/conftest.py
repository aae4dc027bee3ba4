import numpy as np
import pytest

from hsbm.kernels import KernelSpec
from hsbm.network import NetworkCollection, validate_network


def two_block_pair():
    """Two small undirected networks with a visible 2+2 split."""
    y1 = np.array([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    y2 = np.array([[0, 1, 1, 0], [1, 0, 0, 0], [1, 0, 0, 1], [0, 0, 1, 0]])
    spec = KernelSpec("bernoulli-beta", (2, 1), (1, 2))
    return NetworkCollection([validate_network(y1), validate_network(y2)], [spec, spec])


@pytest.fixture
def pair_collection():
    return two_block_pair()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# pass/fail lines from the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
