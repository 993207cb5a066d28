"""Physical model: couplings, mean-field Hamiltonians, Lindblad derivative.

The lattice Hamiltonian is a driven-dissipative Bose–Hubbard model with an
on-site Kerr term U n(n-1), nearest-neighbour hopping -J (a_i^dag a_j + h.c.),
a cross-Kerr density-density coupling V n_i n_j, coherent drive Omega, and
detuning delta, all in a frame rotating at the drive frequency.  Photons leak
from every cavity at rate kappa, which sets the unit of time (kappa = 1 by
convention everywhere).

On a bipartite lattice the two-sublattice mean-field decoupling replaces each
two-site product O_i O_j by O_i <O_j> + <O_i> O_j (dropping the constant), so
each sublattice evolves under a single-mode Hamiltonian whose coefficients are
expectation values of the *other* sublattice.  Couplings enter as z-scaled
combinations zJ and zV (z = lattice coordination number).

An optional correlated-hopping term of strength ``t_ch`` — photon tunneling
whose amplitude depends on the local occupation, plus a pair-tunneling piece —
is available both here (mean-field reduced) and verbatim in the exact lattice
module.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .fock import FockSpace, annihilation, creation, number

__all__ = [
    "ModelParams",
    "MeanFields",
    "CriticalLimit",
    "build_mf_hamiltonian",
    "build_ch_mf",
    "lindblad_rhs",
    "critical_V_analytic",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical couplings, all in units of the photon loss rate kappa.

    ``zJ`` and ``zV`` are coordination-scaled: the mean-field generator sees
    z*J and z*V as single numbers.  ``t_ch`` follows the same convention
    wherever it enters mean-field terms.  ``hard_core`` truncates each mode
    to two levels (n_max = 1) and drops the on-site Kerr term entirely —
    double occupancy is forbidden outright rather than penalized.
    """

    delta: float = 0.0
    omega: float = 0.0
    zJ: float = 0.0
    U: float = 0.0
    zV: float = 0.0
    kappa: float = 1.0
    t_ch: float = 0.0
    hard_core: bool = False
    n_max: int = 10

    def __post_init__(self) -> None:
        if self.kappa <= 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")
        if self.n_max < 1:
            raise ConfigError(f"n_max must be >= 1, got {self.n_max}")
        if self.hard_core and self.n_max != 1:
            # hard-core means a two-level mode; normalize rather than error
            # so callers can flip the flag without touching n_max.
            object.__setattr__(self, "n_max", 1)

    @property
    def dim(self) -> int:
        return self.n_max + 1

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.n_max)

    def with_n_max(self, n_max: int) -> "ModelParams":
        if self.hard_core and n_max != 1:
            raise ConfigError("hard_core mode is pinned to n_max = 1")
        return replace(self, n_max=n_max)


@dataclass(frozen=True)
class MeanFields:
    """Single-sublattice expectation values entering the decoupled generator.

    An instance holds <a>, <n>, <a^dag a^dag a>, and <a a> of *one*
    sublattice; feeding it to :func:`build_mf_hamiltonian` produces the
    Hamiltonian of the *opposite* sublattice.  The last two fields only
    matter when correlated hopping is enabled.
    """

    a: complex = 0j
    n: float = 0.0
    adag2_a: complex = 0j
    aa: complex = 0j

    def __post_init__(self) -> None:
        if self.n < -1e-9:
            raise ConfigError(f"mean occupation must be >= 0, got {self.n}")


def build_mf_hamiltonian(
    params: ModelParams, mf: MeanFields, space: FockSpace | None = None
) -> np.ndarray:
    """Single-sublattice mean-field Hamiltonian given the opposite fields.

    H = -delta*n + Omega*(a + a^dag)
        - zJ*(conj(<a>)*a + <a>*a^dag)
        + U*n(n-1)                       [omitted in hard-core mode]
        + zV*<n>*n
        + correlated-hopping terms       [only if t_ch != 0]

    Hermitian by construction.
    """
    if space is None:
        space = params.space
    if space.dim != params.n_max + 1:
        raise ConfigError(
            f"space dim {space.dim} does not match n_max {params.n_max}"
        )
    a = annihilation(space.dim)
    adag = creation(space.dim)
    n = number(space.dim)

    h = -params.delta * n + params.omega * (a + adag)
    c_hop = -params.zJ * np.conj(mf.a)
    h = h + c_hop * a + np.conj(c_hop) * adag
    if not params.hard_core and params.U != 0.0:
        h = h + params.U * (n @ n - n)
    h = h + (params.zV * mf.n) * n
    if params.t_ch != 0.0:
        h = h + build_ch_mf(params.t_ch, mf, space)
    return h


def build_ch_mf(t_ch: float, mf: MeanFields, space: FockSpace) -> np.ndarray:
    """Mean-field reduction of the correlated-hopping coupling.

    The two-site term families (occupation-dependent tunneling plus pair
    tunneling) decouple bilinearly into local operators weighted by
    opposite-sublattice expectations:

        B = <a^dag a^dag a>*a + <a>*(a^dag a^dag a) - 1/2*<a a>*(a^dag a^dag)
        H_ch = t_ch * (B + B^dag)

    ``t_ch`` carries the same coordination scaling as zJ and zV.
    """
    dim = space.dim
    if t_ch == 0.0:
        return np.zeros((dim, dim), dtype=np.complex128)
    a = annihilation(dim)
    adag = creation(dim)
    a2a = adag @ adag @ a
    pair = adag @ adag
    b = mf.adag2_a * a + mf.a * a2a - 0.5 * mf.aa * pair
    return t_ch * (b + b.conj().T)


def lindblad_rhs(rho: np.ndarray, h: np.ndarray, kappa: float = 1.0) -> np.ndarray:
    """Time derivative of a single-mode density matrix.

    rho_dot = -i[H, rho] + (kappa/2) * (2 a rho a^dag - n rho - rho n)

    The commutator is assembled as -i(M - M^dag) with M = H rho and the
    sandwich term symmetrized, so a Hermitian input yields a Hermitian
    derivative to round-off (no drift over long integrations).
    """
    if rho.shape != h.shape or rho.shape[0] != rho.shape[1]:
        raise ConfigError(f"shape mismatch: rho {rho.shape}, H {h.shape}")
    dim = rho.shape[0]
    a = annihilation(dim)
    n_diag = np.arange(dim, dtype=np.float64)

    m = h @ rho
    comm = -1j * (m - m.conj().T)
    s = (a @ rho) @ a.conj().T
    s = 0.5 * (s + s.conj().T)
    anti = n_diag[:, None] * rho + rho * n_diag[None, :]
    return comm + kappa * s - 0.5 * kappa * anti


class CriticalLimit(enum.Enum):
    """Interaction limit for the analytic crystal threshold."""

    HARD_CORE = "hard_core"
    FREE_U0 = "free_u0"


def critical_V_analytic(
    delta: float, omega: float, limit: CriticalLimit
) -> float:
    """Analytic cross-Kerr threshold zV_c of the uniform-state instability.

    zV_c = gamma * (-2*delta + sqrt(gamma)) / (4*Omega^2), with
    gamma = 4*delta^2 + 8*Omega^2 + 1 in the hard-core limit and
    gamma = 4*delta^2 + 1 for vanishing on-site Kerr (U = 0).

    The closed form is derived for small detunings; treat it as exact only
    at delta = 0 (callers surfacing the value should carry this caveat).
    """
    if omega <= 0:
        raise ConfigError(f"threshold formula requires omega > 0, got {omega}")
    if limit is CriticalLimit.HARD_CORE:
        gamma = 4.0 * delta**2 + 8.0 * omega**2 + 1.0
    elif limit is CriticalLimit.FREE_U0:
        gamma = 4.0 * delta**2 + 1.0
    else:  # pragma: no cover - enum is closed
        raise ConfigError(f"unknown limit {limit!r}")
    return gamma * (-2.0 * delta + math.sqrt(gamma)) / (4.0 * omega**2)
