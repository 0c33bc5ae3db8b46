import numpy as np
import pytest

from src.dv_states import random_density, validate_density
from src.pipeline import config_cache

QUBIT_PAIR = (np.diag([0.8, 0.2]), np.diag([0.6, 0.4]))
QUTRIT_PAIR = (
    np.diag([3.0, 1.0, 1.0]) / 5.0,
    np.array([[6.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 10.0,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def qubit_pair():
    """Commuting qubit pair with ROC vertices (0,1), (3/5,1/5), (1,0)."""
    return tuple(validate_density(m) for m in QUBIT_PAIR)


@pytest.fixture
def qutrit_pair():
    """Non-commuting qutrit pair whose ROC has exactly one curved stretch."""
    return tuple(validate_density(m) for m in QUTRIT_PAIR)


@pytest.fixture
def random_pairs(rng):
    def make(count, dims=(2, 3, 4, 5)):
        out = []
        for k in range(count):
            dim = dims[k % len(dims)]
            out.append((random_density(dim, rng), random_density(dim, rng)))
        return out

    return make


@pytest.fixture(autouse=True)
def _fresh_config(monkeypatch):
    monkeypatch.delenv("QROC_CONFIG", raising=False)
    monkeypatch.delenv("QROC_THREADS", raising=False)
    config_cache.clear()
    yield
    config_cache.clear()
