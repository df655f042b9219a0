"""System test configuration and fixtures."""

import shutil
import tempfile
from pathlib import Path

import pytest


@pytest.fixture
def temp_workspace(test_data_dir):
    """Create a temporary workspace holding the scenario config files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        tmp_path = Path(tmpdir)
        for f in test_data_dir.glob("*.json"):
            shutil.copy2(f, tmp_path)
        yield tmp_path
