"""Root conftest.py with shared fixtures across all test types."""

import numpy as np
import pytest

from .utils import get_test_data_dir


@pytest.fixture
def test_data_dir():
    """Return path to the test data directory."""
    return get_test_data_dir()


@pytest.fixture
def rng():
    """Seeded random generator for reproducible random-state tests."""
    return np.random.default_rng(2016)
