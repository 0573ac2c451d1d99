import numpy as np
import pytest

from wallenius import Dataset, UrnSpec, WeightVector, simulate_dataset


@pytest.fixture(scope="session")
def two_cat():
    """Five 2-category tables with an interior MLE."""
    return simulate_dataset(UrnSpec((10, 10)), WeightVector([0.6, 0.4]), 8, 5, 3)


@pytest.fixture(scope="session")
def three_cat():
    return simulate_dataset(UrnSpec((10, 10, 10)), WeightVector([0.5, 0.3, 0.2]), 10, 30, 11)


@pytest.fixture(scope="session")
def boundary_two_cat():
    return Dataset.from_arrays([[1, 1]], [[1, 0]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
