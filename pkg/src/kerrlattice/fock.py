"""Truncated single-mode Fock space: operators and reference states.

Everything downstream (mean-field dynamics, exact lattice oracle, Wigner
reconstruction) builds on the dense operators defined here.  Matrices are
plain ``numpy.ndarray`` of ``complex128``; sparse assembly for many-site
problems lives in :mod:`kerrlattice.lattice`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError

__all__ = [
    "FockSpace",
    "annihilation",
    "creation",
    "number",
    "identity",
    "coherent_state",
    "fock_state",
]


@dataclass(frozen=True)
class FockSpace:
    """A bosonic mode truncated at occupation ``n_max``.

    ``dim = n_max + 1`` basis states ``|0>, ..., |n_max>``.  ``n_max = 1``
    is the hard-core (two-level) limit.
    """

    n_max: int

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ConfigError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1

    @property
    def a(self) -> np.ndarray:
        return annihilation(self.dim)

    @property
    def adag(self) -> np.ndarray:
        return creation(self.dim)

    @property
    def n(self) -> np.ndarray:
        return number(self.dim)

    @property
    def eye(self) -> np.ndarray:
        return identity(self.dim)


@lru_cache(maxsize=None)
def _annihilation_cached(dim: int) -> np.ndarray:
    mat = np.zeros((dim, dim), dtype=np.complex128)
    ns = np.arange(1, dim)
    mat[ns - 1, ns] = np.sqrt(ns)
    mat.setflags(write=False)
    return mat


def annihilation(dim: int) -> np.ndarray:
    """Annihilation operator ``a`` with ``a|n> = sqrt(n)|n-1>``."""
    if dim < 2:
        raise ConfigError(f"Fock dimension must be >= 2, got {dim}")
    return _annihilation_cached(dim)


def creation(dim: int) -> np.ndarray:
    """Creation operator ``a^dag`` (conjugate transpose of ``a``)."""
    return annihilation(dim).conj().T


@lru_cache(maxsize=None)
def _number_cached(dim: int) -> np.ndarray:
    mat = np.diag(np.arange(dim, dtype=np.float64)).astype(np.complex128)
    mat.setflags(write=False)
    return mat


def number(dim: int) -> np.ndarray:
    """Number operator ``n = a^dag a`` (diagonal 0, 1, ..., dim-1)."""
    if dim < 2:
        raise ConfigError(f"Fock dimension must be >= 2, got {dim}")
    return _number_cached(dim)


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=np.complex128)


def fock_state(n: int, dim: int) -> np.ndarray:
    """Number eigenstate ``|n>`` as a dense ket."""
    if not 0 <= n < dim:
        raise ConfigError(f"Fock index {n} outside [0, {dim - 1}]")
    ket = np.zeros(dim, dtype=np.complex128)
    ket[n] = 1.0
    return ket


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    """Truncated coherent state ``|alpha>``, renormalized after cutoff.

    The amplitudes are ``alpha^n / sqrt(n!)`` up to ``n = dim - 1``; after
    truncation the ket is rescaled to unit norm.  The truncation is only
    trustworthy while the mean occupation sits well below the cutoff, so
    ``|alpha|^2 > 0.5 * (dim - 1)`` is rejected.
    """
    alpha = complex(alpha)
    nbar = abs(alpha) ** 2
    if nbar > 0.5 * (dim - 1):
        raise ConfigError(
            f"coherent amplitude |alpha|^2 = {nbar:.3g} too large for "
            f"cutoff n_max = {dim - 1}; need |alpha|^2 <= {0.5 * (dim - 1)}"
        )
    ns = np.arange(dim)
    # alpha^n / sqrt(n!) computed in log space to stay finite for large n.
    if alpha == 0:
        ket = np.zeros(dim, dtype=np.complex128)
        ket[0] = 1.0
        return ket
    from scipy.special import gammaln

    log_mag = ns * np.log(abs(alpha)) - 0.5 * gammaln(ns + 1.0)
    phase = np.exp(1j * ns * np.angle(alpha))
    ket = np.exp(log_mag) * phase
    ket /= np.linalg.norm(ket)
    return ket.astype(np.complex128)
