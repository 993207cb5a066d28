"""Numerically exact Lindblad solver for small cavity chains.

This module is the validation oracle for the two-sublattice mean-field
engine: it builds the full many-body Hamiltonian on a tensor-product Fock
space, finds the steady state of the dissipative dynamics, and evaluates
density-density correlations g2(i, j).

Coupling convention: the ``zJ``, ``zV`` and ``t_ch`` fields of
:class:`~kerrlattice.model.ModelParams` are read here as *bare per-bond*
couplings J, V, t_ch — not the coordination-scaled combinations the
mean-field module uses.  Callers comparing against mean-field results must
divide by the coordination number themselves (the command-line ``oracle``
mode does this and records both values).
"""

from __future__ import annotations

import enum
import string
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .errors import (
    ConfigError,
    MultistabilityError,
    NumericalError,
    UndefinedCorrelatorError,
)
from .fock import annihilation, number
from .model import ModelParams

__all__ = [
    "Geometry",
    "LatticeSpec",
    "LatticeState",
    "SteadyStateMethod",
    "build_lattice_hamiltonian",
    "g2",
    "g2_by_distance",
    "g2_table",
    "occupation",
    "reduced_density",
    "site_operator",
    "steady_state",
]

#: Krylov workspace above this many bytes is scaled down automatically.
_KRYLOV_MEMORY_BUDGET = 1_500_000_000


class Geometry(enum.Enum):
    """Connectivity of the cavity chain."""

    OPEN_CHAIN = "open_chain"
    PERIODIC_CHAIN = "periodic_chain"


class SteadyStateMethod(enum.Enum):
    """How the asymptotic density matrix is obtained."""

    NULL_SPACE = "null_space"
    LONG_TIME = "long_time"


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry and local truncation of an exact chain."""

    n_sites: int
    n_max: int
    geometry: Geometry = Geometry.OPEN_CHAIN
    dim_cap: int = 4096

    def __post_init__(self) -> None:
        if self.n_sites < 1:
            raise ConfigError("n_sites must be at least 1")
        if self.n_max < 1:
            raise ConfigError("n_max must be at least 1")
        if self.geometry is Geometry.PERIODIC_CHAIN and self.n_sites < 3:
            raise ConfigError(
                "a periodic chain needs at least 3 sites; smaller rings "
                "duplicate bonds"
            )
        if self.dim > self.dim_cap:
            raise ConfigError(
                f"total dimension {self.dim} exceeds the cap {self.dim_cap}"
            )

    @property
    def local_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return self.local_dim**self.n_sites

    @property
    def bonds(self) -> tuple[tuple[int, int], ...]:
        pairs = [(i, i + 1) for i in range(self.n_sites - 1)]
        if self.geometry is Geometry.PERIODIC_CHAIN:
            pairs.append((self.n_sites - 1, 0))
        return tuple(pairs)

    def distance(self, i: int, j: int) -> int:
        """Graph distance between two sites."""
        self._check_site(i)
        self._check_site(j)
        r = abs(i - j)
        if self.geometry is Geometry.PERIODIC_CHAIN:
            r = min(r, self.n_sites - r)
        return r

    def _check_site(self, i: int) -> None:
        if not 0 <= i < self.n_sites:
            raise ConfigError(f"site index {i} outside 0..{self.n_sites - 1}")


@dataclass(frozen=True)
class LatticeState:
    """Density matrix on the full tensor-product space."""

    rho: np.ndarray
    spec: LatticeSpec
    #: construction-time tolerances for trace / Hermiticity / positivity
    tol: float = field(default=1e-8, compare=False)

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=np.complex128)
        object.__setattr__(self, "rho", rho)
        d = self.spec.dim
        if rho.shape != (d, d):
            raise ConfigError(f"state shape {rho.shape} does not match dim {d}")
        if abs(np.trace(rho) - 1.0) > self.tol:
            raise NumericalError(f"trace deviates by {abs(np.trace(rho) - 1.0):.3e}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > self.tol:
            raise NumericalError(f"Hermiticity residual {herm:.3e}")
        if _min_eigenvalue(rho) < -self.tol:
            raise NumericalError("state has a significantly negative eigenvalue")


def _min_eigenvalue(rho: np.ndarray) -> float:
    if rho.shape[0] <= 2048:
        return float(np.linalg.eigvalsh(rho)[0])
    from scipy.sparse.linalg import eigsh

    val = eigsh(rho, k=1, which="SA", return_eigenvectors=False, tol=1e-9)
    return float(val[0])


def site_operator(op: np.ndarray, site: int, spec: LatticeSpec) -> sp.csr_matrix:
    """Embed a single-site operator into the full tensor-product space."""
    spec._check_site(site)
    d = spec.local_dim
    if op.shape != (d, d):
        raise ConfigError(f"operator shape {op.shape} does not match local dim {d}")
    left = sp.identity(d**site, format="csr", dtype=np.complex128)
    right = sp.identity(
        d ** (spec.n_sites - site - 1), format="csr", dtype=np.complex128
    )
    return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")


def _pair_term(
    op_i: np.ndarray, i: int, op_j: np.ndarray, j: int, spec: LatticeSpec
) -> sp.csr_matrix:
    return site_operator(op_i, i, spec) @ site_operator(op_j, j, spec)


def build_lattice_hamiltonian(
    spec: LatticeSpec, params: ModelParams
) -> sp.csr_matrix:
    """Full many-body Hamiltonian of the driven chain (sparse, Hermitian).

    ``params.zJ``/``params.zV``/``params.t_ch`` are interpreted as the bare
    per-bond couplings J, V, t_ch (see module docstring).  ``params.n_max``
    and ``params.hard_core`` are ignored; the truncation comes from ``spec``.
    """
    d = spec.local_dim
    a = annihilation(d)
    n = number(d)
    nvec = np.diag(n).real
    local = (
        -params.delta * n
        + params.omega * (a + a.conj().T)
        + params.U * np.diag(nvec * (nvec - 1.0)).astype(np.complex128)
    )

    h = sp.csr_matrix((spec.dim, spec.dim), dtype=np.complex128)
    for i in range(spec.n_sites):
        h = h + site_operator(local, i, spec)

    if not spec.bonds:
        return h.tocsr()

    adag = a.conj().T
    hop = sp.csr_matrix((spec.dim, spec.dim), dtype=np.complex128)
    for i, j in spec.bonds:
        hop = hop + _pair_term(adag, i, a, j, spec)
    h = h - params.zJ * (hop + hop.conj().T)

    if params.zV != 0.0:
        for i, j in spec.bonds:
            h = h + params.zV * _pair_term(n, i, n, j, spec)

    if params.t_ch != 0.0:
        a2a = adag @ adag @ a
        a2 = adag @ adag
        aa = a @ a
        ch = sp.csr_matrix((spec.dim, spec.dim), dtype=np.complex128)
        for i, j in spec.bonds:
            ch = ch + _pair_term(a, i, a2a, j, spec)
            ch = ch + _pair_term(a2a, i, a, j, spec)
            ch = ch - 0.5 * _pair_term(a2, i, aa, j, spec)
        h = h + params.t_ch * (ch + ch.conj().T)

    return h.tocsr()


def _jump_operators(spec: LatticeSpec) -> list[sp.csr_matrix]:
    a = annihilation(spec.local_dim)
    return [site_operator(a, i, spec) for i in range(spec.n_sites)]


def _number_diagonal(spec: LatticeSpec) -> np.ndarray:
    """Diagonal of the total photon number operator."""
    nvec = np.arange(spec.local_dim, dtype=np.float64)
    total = np.zeros(spec.dim)
    for i in range(spec.n_sites):
        reps_left = spec.local_dim**i
        reps_right = spec.local_dim ** (spec.n_sites - i - 1)
        total += np.tile(np.repeat(nvec, reps_right), reps_left)
    return total


def _make_apply_liouvillian(spec: LatticeSpec, params: ModelParams):
    """Matrix-free action of the Lindblad generator on a density matrix."""
    h = build_lattice_hamiltonian(spec, params)
    jumps = _jump_operators(spec)
    ntot = _number_diagonal(spec)
    kappa = params.kappa

    def apply_l(rho: np.ndarray) -> np.ndarray:
        m = h @ rho
        out = -1j * (m - m.conj().T)
        for a_i in jumps:
            # a rho a^dag, using only sparse-from-the-left products
            out += kappa * (a_i @ (a_i @ rho).conj().T).conj().T
        out -= (0.5 * kappa) * (ntot[:, None] + ntot[None, :]) * rho
        return out

    return apply_l


def _dense_liouvillian(spec: LatticeSpec, params: ModelParams) -> np.ndarray:
    """Vectorized generator, row-major convention vec(A rho B) = (A kron B^T) vec(rho)."""
    h = build_lattice_hamiltonian(spec, params).toarray()
    d = spec.dim
    eye = np.eye(d)
    lv = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    kappa = params.kappa
    for a_i in _jump_operators(spec):
        a_d = a_i.toarray()
        n_d = (a_i.conj().T @ a_i).toarray()
        lv += kappa * np.kron(a_d, a_d.conj())
        lv -= (0.5 * kappa) * (np.kron(n_d, eye) + np.kron(eye, n_d.T))
    return lv


def _kernel_from_dense(lv: np.ndarray, dim: int) -> np.ndarray:
    """One-dimensional kernel of the vectorized generator, as a density matrix."""
    _, svals, vh = np.linalg.svd(lv)
    threshold = max(svals[0], 1.0) * 1e-10
    n_zero = int(np.sum(svals < threshold))
    if n_zero == 0:
        raise NumericalError(
            "no steady state found: smallest singular value "
            f"{svals[-1]:.3e} is above the kernel threshold"
        )
    if n_zero > 1:
        raise MultistabilityError(
            f"steady-state manifold is {n_zero}-dimensional; refusing to pick one"
        )
    rho = vh[-1].conj().reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-12:
        raise NumericalError("kernel vector is traceless; not a physical state")
    return rho / tr


def _krylov_dim_for(dimsq: int, requested: int) -> int:
    affordable = max(8, _KRYLOV_MEMORY_BUDGET // (16 * dimsq) - 1)
    return max(2, min(requested, affordable, dimsq))


def _expm_krylov_step(apply_l, rho: np.ndarray, dt: float, m: int):
    """One Arnoldi approximation of exp(dt L) rho.

    Returns the advanced density matrix and the entry residual
    ||L rho||_F, which is a free by-product of the first Arnoldi column.
    """
    shape = rho.shape
    v = rho.ravel()
    beta0 = np.linalg.norm(v)
    basis = np.empty((m + 1, v.size), dtype=np.complex128)
    basis[0] = v / beta0
    hess = np.zeros((m + 1, m), dtype=np.complex128)
    residual = None
    m_eff = m
    for j in range(m):
        w = apply_l(basis[j].reshape(shape)).ravel()
        if j == 0:
            residual = beta0 * np.linalg.norm(w)
        norm_in = np.linalg.norm(w)
        for i in range(j + 1):
            coef = np.vdot(basis[i], w)
            hess[i, j] += coef
            w -= coef * basis[i]
        if np.linalg.norm(w) < 0.7 * norm_in:
            # one re-orthogonalization pass when cancellation was severe
            for i in range(j + 1):
                coef = np.vdot(basis[i], w)
                hess[i, j] += coef
                w -= coef * basis[i]
        h_next = np.linalg.norm(w)
        hess[j + 1, j] = h_next
        if h_next < 1e-12 * max(1.0, abs(hess[j, j])):
            m_eff = j + 1
            break
        basis[j + 1] = w / h_next
    prop = expm(dt * hess[:m_eff, :m_eff])
    y = beta0 * prop[:, 0]
    out = (y @ basis[:m_eff]).reshape(shape)
    return out, float(residual)


def steady_state(
    spec: LatticeSpec,
    params: ModelParams,
    method: SteadyStateMethod = SteadyStateMethod.LONG_TIME,
    *,
    tol: float = 1e-8,
    t_max: float = 4000.0,
    dt: float = 2.0,
    krylov_dim: int = 30,
    nullspace_cap: int = 64,
) -> LatticeState:
    """Asymptotic density matrix of the dissipative chain.

    ``NULL_SPACE`` computes the kernel of the dense vectorized generator
    (feasible only for small spaces); ``LONG_TIME`` propagates the vacuum
    with Krylov-subspace exponential steps until the Frobenius norm of the
    time derivative drops below ``tol``.
    """
    if method is SteadyStateMethod.NULL_SPACE:
        if spec.dim > nullspace_cap:
            raise ConfigError(
                f"NullSpace needs dim <= {nullspace_cap}, got {spec.dim}; "
                "use LongTime instead"
            )
        rho = _kernel_from_dense(_dense_liouvillian(spec, params), spec.dim)
        return LatticeState(rho=rho, spec=spec)

    apply_l = _make_apply_liouvillian(spec, params)
    m = _krylov_dim_for(spec.dim**2, krylov_dim)
    rho = np.zeros((spec.dim, spec.dim), dtype=np.complex128)
    rho[0, 0] = 1.0
    t = 0.0
    while True:
        advanced, residual = _expm_krylov_step(apply_l, rho, dt, m)
        if residual < tol:
            return LatticeState(rho=rho, spec=spec)
        rho = 0.5 * (advanced + advanced.conj().T)
        rho /= np.trace(rho).real
        t += dt
        if t > t_max:
            raise NumericalError(
                f"steady state not reached by t={t_max:g}: residual {residual:.3e}"
            )


def occupation(state: LatticeState, site: int) -> float:
    """Mean photon number on one site."""
    state.spec._check_site(site)
    n_i = site_operator(number(state.spec.local_dim), site, state.spec)
    return float(_trace_product(state.rho, n_i).real)


def _trace_product(rho: np.ndarray, op: sp.spmatrix) -> complex:
    # tr(rho O) = sum_ij rho_ij O_ji
    return complex(op.multiply(rho.T).sum())


def g2(state: LatticeState, i: int, j: int) -> float:
    """Normalized density-density correlator g2(i, j).

    g2 = <a_i^dag a_j^dag a_j a_i> / (<n_i><n_j>); for i = j this is the
    on-site correlator <a^dag a^dag a a> / <n>^2.
    """
    spec = state.spec
    spec._check_site(i)
    spec._check_site(j)
    a = annihilation(spec.local_dim)
    n_loc = number(spec.local_dim)
    n_i = float(_trace_product(state.rho, site_operator(n_loc, i, spec)).real)
    n_j = (
        n_i
        if j == i
        else float(_trace_product(state.rho, site_operator(n_loc, j, spec)).real)
    )
    if min(n_i, n_j) <= 1e-12:
        raise UndefinedCorrelatorError(
            f"g2({i},{j}) undefined: occupations ({n_i:.3e}, {n_j:.3e})"
        )
    if i == j:
        lowering = site_operator(a @ a, i, spec)
    else:
        lowering = site_operator(a, i, spec) @ site_operator(a, j, spec)
    numerator = _trace_product(state.rho, lowering.conj().T @ lowering).real
    return float(numerator / (n_i * n_j))


def g2_table(state: LatticeState) -> list[tuple[int, int, int, float]]:
    """All pair correlators as (i, j, distance, g2) rows with i <= j."""
    spec = state.spec
    rows = []
    for i in range(spec.n_sites):
        for j in range(i, spec.n_sites):
            rows.append((i, j, spec.distance(i, j), g2(state, i, j)))
    return rows


def g2_by_distance(state: LatticeState) -> dict[int, float]:
    """g2 averaged over all site pairs at each graph distance >= 1."""
    sums: dict[int, list[float]] = {}
    for _, _, r, val in g2_table(state):
        if r >= 1:
            sums.setdefault(r, []).append(val)
    return {r: float(np.mean(vals)) for r, vals in sorted(sums.items())}


def reduced_density(state: LatticeState, site: int) -> np.ndarray:
    """Partial trace onto one site."""
    spec = state.spec
    spec._check_site(site)
    n, d = spec.n_sites, spec.local_dim
    if 2 * n > len(string.ascii_lowercase):
        raise ConfigError("too many sites for the partial-trace contraction")
    tensor = state.rho.reshape((d,) * (2 * n))
    ket = list(string.ascii_lowercase[:n])
    bra = ket.copy()
    bra[site] = string.ascii_lowercase[n]
    subscript = "".join(ket) + "".join(bra) + "->" + ket[site] + bra[site]
    return np.einsum(subscript, tensor)
