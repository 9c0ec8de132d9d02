"""Shared pytest configuration."""

import pytest

from src.models import CoefficientModel


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running convergence and Monte Carlo checks")


@pytest.fixture
def half():
    """Independent coefficients (H=1/2)."""
    return CoefficientModel.fractional(0.5)


@pytest.fixture
def limit_zero():
    return CoefficientModel.limit_zero()


ALL_MODELS = [
    CoefficientModel.fractional(0.1),
    CoefficientModel.fractional(0.3),
    CoefficientModel.fractional(0.5),
    CoefficientModel.fractional(0.75),
    CoefficientModel.fractional(0.9),
    CoefficientModel.limit_zero(),
]
