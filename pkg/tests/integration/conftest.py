"""Integration test configuration and fixtures."""

import pytest

from ctxlab.runner import reproduction_checks


@pytest.fixture(scope="session")
def reproduction():
    """Run the full reproduction suite once and index the checks by name."""
    return {check.name: check for check in reproduction_checks()}
