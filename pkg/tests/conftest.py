"""
QVBS v1 - Test Configuration and Fixtures

Shared q grids and small materialized chains.
"""

import pytest

from qvbs.config import reset_config
from qvbs.oracle import mps_state

# Deformation grids used across the suite
Q_ORACLE = [0.5, 1.0, 2.0]
Q_SPECTRUM = [0.3, 0.7, 1.0, 1.5, 3.0]
Q_MODERATE = [0.7, 1.0, 1.5]


@pytest.fixture(autouse=True)
def fresh_config():
    """Every test sees settings read from its own environment."""
    reset_config()
    yield
    reset_config()


@pytest.fixture(params=Q_ORACLE, ids=lambda q: f"q={q}")
def q_oracle(request) -> float:
    return request.param


@pytest.fixture(params=Q_SPECTRUM, ids=lambda q: f"q={q}")
def q_spectrum(request) -> float:
    return request.param


@pytest.fixture(scope="session")
def spin1_chain():
    """Factory for cached spin-1 matrix-product states."""
    cache = {}

    def build(q: float, L: int):
        if (q, L) not in cache:
            cache[(q, L)] = mps_state(1, q, L)
        return cache[(q, L)]

    return build
