"""
Shared fixtures for the crel test suite.
"""

import importlib

import pytest

from crel.core.streams import derive_rng
from crel.model_data.datasets import Dataset
from crel.model_data.generators import generate_contaminated_poisson, generate_laplace


@pytest.fixture
def rng():
    return derive_rng(12345)


@pytest.fixture
def three_points():
    """The {-1, 0, 2} fixture with closed-form EL and ET solutions at theta = 0."""
    return Dataset(obs=[-1.0, 0.0, 2.0])


@pytest.fixture
def laplace_sample():
    return generate_laplace(60, 0.0, seed=7)


@pytest.fixture
def normal_sample(rng):
    return Dataset(obs=rng.normal(1.0, 2.0, size=200))


@pytest.fixture
def poisson_sample():
    return generate_contaminated_poisson(80, [0.5, 0.3, -0.2], None, seed=3)


@pytest.fixture
def log_dir(tmp_path, monkeypatch):
    """Route command-line logging into a temporary directory."""
    path = tmp_path / "logs"
    monkeypatch.setattr(importlib.import_module("crel.cli.main"), "LOG_DIR", path)
    return path
