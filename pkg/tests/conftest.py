"""Shared helpers for the test suite."""

import numpy as np
import pytest

from eeqt.states import HybridState


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random unit-trace positive semidefinite matrix."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hybrid_state(n_classical: int, dim: int,
                        rng: np.random.Generator) -> HybridState:
    """Random valid hybrid state with strictly positive block traces."""
    blocks = np.stack([random_density(dim, rng) for _ in range(n_classical)])
    weights = rng.dirichlet(np.ones(n_classical))
    return HybridState(weights[:, None, None] * blocks)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
