"""Tests for project path helpers."""

import os

import pytest

from ctxlab.utils.fs_utils import project_root

pytestmark = pytest.mark.unit


def test_project_root_holds_manifest():
    assert os.path.isfile(os.path.join(project_root(), "pyproject.toml"))


def test_project_root_with_file():
    assert project_root("config.yaml") == os.path.join(project_root(), "config.yaml")


def test_project_root_relative():
    assert not os.path.isabs(project_root(relative=True))
