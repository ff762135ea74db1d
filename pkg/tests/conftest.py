"""Shared builders for the test suite.

All randomness is seeded through ``np.random.default_rng`` with explicit
seeds so every run sees the same corpus.
"""

from __future__ import annotations

import numpy as np
import pytest

from laplab import models, perturb


def random_hermitian(rng: np.random.Generator, k: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    return scale * 0.5 * (a + a.conj().T)


def random_psd(rng: np.random.Generator, k: int, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))
    m = g.conj().T @ g
    return scale * 0.5 * (m + m.conj().T)


def random_finite_pair(
    rng: np.random.Generator, n_max: int = 12, k_max: int = 4
) -> tuple[models.FiniteHermitian, models.FiniteRigging]:
    n = int(rng.integers(2, n_max + 1))
    k = int(rng.integers(1, min(k_max, n) + 1))
    h = random_hermitian(rng, n)
    f = rng.normal(size=(k, n)) + 1j * rng.normal(size=(k, n))
    return models.FiniteHermitian(h), models.FiniteRigging(f)


@pytest.fixture(scope="session")
def lattice_delta0():
    return models.FreeLattice1D(), models.delta_rigging()


@pytest.fixture(scope="session")
def embedded_model():
    """Free lattice (delta_0 channel) + point mass at 0: the embedded case."""
    return models.make_direct_sum(
        (models.FreeLattice1D(), models.delta_rigging()),
        (models.FiniteHermitian(np.array([[0.0]])), models.FiniteRigging(np.array([[1.0]]))),
    )


@pytest.fixture(scope="session")
def swap_direction():
    return perturb.Direction(np.array([[0.0, 1.0], [1.0, 0.0]]))
