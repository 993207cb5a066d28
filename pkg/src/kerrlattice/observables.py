"""Expectation values, mean-field expectation bundles, Wigner functions."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import ConfigError, NumericalError
from .fock import annihilation, creation, number
from .model import MeanFields

__all__ = [
    "WignerGrid",
    "expectation",
    "mf_expectations",
    "trace_distance",
    "wigner",
]


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    """tr(op @ rho) without forming the product matrix."""
    if op.shape != rho.shape:
        raise ConfigError(f"shape mismatch: op {op.shape}, rho {rho.shape}")
    return complex(np.einsum("ij,ji->", op, rho))


def trace_distance(rho_1: np.ndarray, rho_2: np.ndarray) -> float:
    """Half the trace norm of the difference of two density matrices."""
    if rho_1.shape != rho_2.shape:
        raise ConfigError(
            f"shape mismatch: {rho_1.shape} vs {rho_2.shape}"
        )
    diff = rho_1 - rho_2
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def mf_expectations(state) -> tuple[MeanFields, MeanFields]:
    """The four decoupling fields (<a>, <n>, <a^dag a^dag a>, <a a>) of each
    sublattice, computed in one pass over the pair of density matrices.

    Feeding the A-sublattice bundle to the Hamiltonian builder produces the
    generator of sublattice B and vice versa.
    """
    out = []
    for rho in (state.rho_A, state.rho_B):
        dim = rho.shape[0]
        a = annihilation(dim)
        adag = creation(dim)
        a2a = adag @ adag @ a
        aa = a @ a
        out.append(
            MeanFields(
                a=expectation(a, rho),
                n=max(expectation(number(dim), rho).real, 0.0),
                adag2_a=expectation(a2a, rho),
                aa=expectation(aa, rho),
            )
        )
    return out[0], out[1]


@dataclass(frozen=True)
class WignerGrid:
    """Phase-space quasi-probability W sampled on a rectangular grid.

    ``values[i, j]`` is W(xs[i], ps[j]); quadratures follow the convention
    x = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2), so a coherent state
    |alpha> sits at (x, p) = (sqrt(2) Re alpha, sqrt(2) Im alpha).  The
    normalization carries the 1/pi prefactor, so the grid integrates to 1.
    """

    xs: np.ndarray
    ps: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        """Riemann-sum estimate of the total quasi-probability."""
        dx = float(self.xs[1] - self.xs[0]) if len(self.xs) > 1 else 1.0
        dp = float(self.ps[1] - self.ps[0]) if len(self.ps) > 1 else 1.0
        return float(np.sum(self.values) * dx * dp)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "p", "W"])
            for i, x in enumerate(self.xs):
                for j, p in enumerate(self.ps):
                    writer.writerow([repr(float(x)), repr(float(p)),
                                     repr(float(self.values[i, j]))])


def _wigner_kernel(m: int, n: int, z: np.ndarray, r2: np.ndarray) -> np.ndarray:
    """Wigner transform of |m><n| for m >= n on a grid.

    (1/pi) * (-1)^n * sqrt(2^(m-n) n!/m!) * z^(m-n)
           * exp(-|z|^2) * L_n^(m-n)(2|z|^2)

    with z = x - i p and r2 = x^2 + p^2.
    """
    k = m - n
    log_coef = 0.5 * (k * np.log(2.0) + gammaln(n + 1.0) - gammaln(m + 1.0))
    coef = ((-1.0) ** n / np.pi) * np.exp(log_coef)
    return coef * z**k * np.exp(-r2) * eval_genlaguerre(n, k, 2.0 * r2)


def wigner(rho: np.ndarray, xs: np.ndarray, ps: np.ndarray) -> WignerGrid:
    """Wigner function of a single-mode density matrix on a grid.

    Evaluates the Fock-basis closed form (Gaussian times generalized
    Laguerre polynomials) rather than integrating the defining transform
    numerically; exact up to the Fock truncation of ``rho``.
    """
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    if xs.size == 0 or ps.size == 0:
        raise ConfigError("wigner grid must be non-empty")
    dim = rho.shape[0]
    x = xs[:, None]
    p = ps[None, :]
    z = x - 1j * p
    r2 = x**2 + p**2
    w = np.zeros((xs.size, ps.size), dtype=np.complex128)
    for m in range(dim):
        for n in range(m + 1):
            kern = _wigner_kernel(m, n, z, r2)
            if m == n:
                w += rho[m, n] * kern
            else:
                w += rho[m, n] * kern + rho[n, m] * np.conj(kern)
    resid = float(np.max(np.abs(w.imag))) if w.size else 0.0
    if resid > 1e-6:
        raise NumericalError(
            f"Wigner grid has imaginary residue {resid:.2e}; "
            "input density matrix is far from Hermitian"
        )
    return WignerGrid(xs=xs, ps=ps, values=w.real)
