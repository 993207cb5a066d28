"""Shared helpers for the test suite."""

import numpy as np


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    """A random valid density matrix (Hermitian, unit trace, PSD)."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)
