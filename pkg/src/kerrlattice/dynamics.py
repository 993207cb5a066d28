"""Two-sublattice mean-field evolution and steady-state phase classification.

The bipartite mean-field decoupling turns the lattice master equation into
two coupled single-mode Lindblad equations, one per sublattice, each driven
by the instantaneous expectation values of the other.  This module
integrates that coupled system, monitors the physicality invariants of both
density matrices, and classifies the asymptotic regime as

* ``Uniform``     — stationary with equal sublattice occupations,
* ``Crystal``     — stationary with a finite occupation imbalance
                    (checkerboard photon solid, order parameter
                    delta_n = |<n_A> - <n_B>|),
* ``Oscillating`` — non-stationary limit cycle with a detected period.

Symmetry breaking needs an asymmetric seed: the equations are deterministic,
so a perfectly symmetric initial state can never develop delta_n != 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from . import _mf_kernel
from .errors import (
    ConfigError,
    InconclusiveError,
    NumericalError,
    TruncationError,
)
from .fock import FockSpace, coherent_state, number
from .model import MeanFields, ModelParams, build_mf_hamiltonian
from .observables import expectation

__all__ = [
    "IntegratorControls",
    "ClassifierControls",
    "MeanFieldState",
    "Trajectory",
    "Phase",
    "PhaseLabel",
    "SymmetricVacuum",
    "AsymmetricCoherent",
    "FockOccupation",
    "SeedSpec",
    "seed_state",
    "evolve",
    "evolve_auto",
    "classify",
    "order_parameter",
]


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class IntegratorControls:
    """Fixed-step RK4 settings and physicality tolerances.

    On an invariant violation the step is halved and the segment rerun, up
    to ``max_halvings`` times.  ``abort_top_pop``, when positive, stops the
    integration as soon as the top Fock level of either sublattice exceeds
    it (used by the automatic truncation escalation).
    """

    dt: float = 1e-3
    sample_dt: float = 0.02
    backend: str = "auto"  # auto | numba | numpy
    tol_trace: float = 1e-8
    tol_herm: float = 1e-10
    tol_eig: float = 1e-8
    max_halvings: int = 3
    min_dt: float = 1e-6
    abort_top_pop: float = 0.0

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.sample_dt <= 0:
            raise ConfigError("dt and sample_dt must be positive")
        if self.backend not in ("auto", "numba", "numpy"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.sample_dt < self.dt:
            raise ConfigError("sample_dt must be >= dt")


@dataclass(frozen=True)
class ClassifierControls:
    """Thresholds for the phase decision.

    The analysis window is the final ``t_window`` of the trajectory; the
    trajectory must be at least ``t_transient + t_window`` long so that the
    window never overlaps the initial transient.  ``eps_stationary`` bounds
    max ||rho_dot||_F for a state to count as stationary, ``eps_crystal``
    is the delta_n threshold separating Uniform from Crystal, and
    ``return_tol`` is the closure tolerance of the limit-cycle test in
    (Re<a_A>, Im<a_A>, Re<a_B>, Im<a_B>) space.
    """

    t_transient: float = 200.0
    t_window: float = 100.0
    eps_stationary: float = 1e-6
    eps_crystal: float = 1e-3
    return_tol: float = 1e-4
    min_cycle_amplitude: float = 1e-3

    def __post_init__(self) -> None:
        if self.t_transient < 0 or self.t_window <= 0:
            raise ConfigError("invalid classification window")


# ---------------------------------------------------------------------------
# state, trajectory, label types


@dataclass(frozen=True)
class MeanFieldState:
    """Pair of sublattice density matrices at a common time."""

    rho_A: np.ndarray
    rho_B: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        for name, rho in (("rho_A", self.rho_A), ("rho_B", self.rho_B)):
            if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
                raise ConfigError(f"{name} must be a square matrix")
            if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
                raise ConfigError(f"{name} is not Hermitian")
            if abs(np.trace(rho).real - 1.0) > 1e-8:
                raise ConfigError(f"{name} trace deviates from 1")
            if np.linalg.eigvalsh(rho)[0] < -1e-8:
                raise ConfigError(f"{name} has a negative eigenvalue")
        if self.rho_A.shape != self.rho_B.shape:
            raise ConfigError("sublattice dimensions differ")

    @property
    def dim(self) -> int:
        return self.rho_A.shape[0]


@dataclass(frozen=True)
class Trajectory:
    """Sampled observables of one mean-field evolution.

    ``residual_A/B`` are Frobenius norms of rho_dot at the sample times;
    ``trace_err``, ``herm_err``, ``min_eig`` and ``top_pop`` track the
    physicality invariants and the truncation adequacy.  ``final`` is the
    state at the last sample.
    """

    times: np.ndarray
    a_A: np.ndarray
    a_B: np.ndarray
    n_A: np.ndarray
    n_B: np.ndarray
    residual_A: np.ndarray
    residual_B: np.ndarray
    trace_err: np.ndarray
    herm_err: np.ndarray
    min_eig: np.ndarray
    top_pop: np.ndarray
    final: MeanFieldState
    dt: float

    def __post_init__(self) -> None:
        if len(self.times) == 0:
            raise ConfigError("empty trajectory")
        if np.any(np.diff(self.times) <= 0):
            raise ConfigError("sample times must be strictly increasing")

    @property
    def delta_n(self) -> np.ndarray:
        return np.abs(self.n_A - self.n_B)


class Phase(Enum):
    UNIFORM = "uniform"
    CRYSTAL = "crystal"
    OSCILLATING = "oscillating"


@dataclass(frozen=True)
class PhaseLabel:
    """Classification outcome: phase kind, order parameter, cycle period."""

    kind: Phase
    delta_n: float
    period: Optional[float] = None

    def __post_init__(self) -> None:
        if self.delta_n < 0:
            raise ConfigError("delta_n must be >= 0")
        if self.kind is Phase.OSCILLATING and self.period is None:
            raise ConfigError("oscillating label requires a period")


# ---------------------------------------------------------------------------
# initial states


@dataclass(frozen=True)
class SymmetricVacuum:
    """Both sublattices in the vacuum."""


@dataclass(frozen=True)
class AsymmetricCoherent:
    """Coherent seeds |alpha_A>, |alpha_B>; the default symmetry-breaking
    choice is a small amplitude on one sublattice only."""

    alpha_A: complex = 0.1
    alpha_B: complex = 0.0


@dataclass(frozen=True)
class FockOccupation:
    """Diagonal seeds with mean occupations n_A0, n_B0; non-integer values
    interpolate linearly between the two nearest Fock levels."""

    n_A0: float = 0.0
    n_B0: float = 0.0


SeedSpec = Union[SymmetricVacuum, AsymmetricCoherent, FockOccupation]


def _fock_mix(n0: float, dim: int) -> np.ndarray:
    if n0 < 0 or n0 > dim - 1:
        raise ConfigError(
            f"target occupation {n0} not representable with n_max {dim - 1}"
        )
    rho = np.zeros((dim, dim), dtype=np.complex128)
    k = int(math.floor(n0))
    w = n0 - k
    if w == 0.0:
        rho[k, k] = 1.0
    else:
        rho[k, k] = 1.0 - w
        rho[k + 1, k + 1] = w
    return rho


def seed_state(seed: SeedSpec, space: FockSpace) -> MeanFieldState:
    """Product initial condition for the two sublattices."""
    dim = space.dim
    if isinstance(seed, SymmetricVacuum):
        rho = np.zeros((dim, dim), dtype=np.complex128)
        rho[0, 0] = 1.0
        return MeanFieldState(rho_A=rho, rho_B=rho.copy(), t=0.0)
    if isinstance(seed, AsymmetricCoherent):
        kets = [coherent_state(seed.alpha_A, dim), coherent_state(seed.alpha_B, dim)]
        rho_a, rho_b = (np.outer(k, k.conj()) for k in kets)
        return MeanFieldState(rho_A=rho_a, rho_B=rho_b, t=0.0)
    if isinstance(seed, FockOccupation):
        return MeanFieldState(
            rho_A=_fock_mix(seed.n_A0, dim), rho_B=_fock_mix(seed.n_B0, dim), t=0.0
        )
    raise ConfigError(f"unknown seed specification {seed!r}")


# ---------------------------------------------------------------------------
# evolution


def _resolve_backend(requested: str) -> str:
    if requested == "auto":
        return "numba" if _mf_kernel.HAVE_NUMBA else "numpy"
    if requested == "numba" and not _mf_kernel.HAVE_NUMBA:
        raise ConfigError("numba backend requested but numba is not importable")
    return requested


def _constant_hamiltonian(params: ModelParams) -> np.ndarray:
    frozen = replace(params, zJ=0.0, zV=0.0, t_ch=0.0)
    return build_mf_hamiltonian(frozen, MeanFields())


def evolve(
    initial: MeanFieldState,
    params: ModelParams,
    t_final: float,
    controls: IntegratorControls = IntegratorControls(),
) -> Trajectory:
    """Integrate the coupled sublattice equations up to ``t_final``.

    ``t_final`` is on the same clock as ``initial.t``; the duration
    ``t_final - initial.t`` must be positive.  At every RK4 stage each
    sublattice's generator uses the other sublattice's fields from that same
    stage, making the pair a single self-consistent ODE system.  Returns the
    trajectory sampled every ``controls.sample_dt``.
    """
    duration = t_final - initial.t
    if duration <= 0:
        raise ConfigError(f"t_final {t_final} not beyond initial time {initial.t}")
    if initial.dim != params.dim:
        raise ConfigError(
            f"state dim {initial.dim} does not match params n_max {params.n_max}"
        )
    backend = _resolve_backend(controls.backend)
    consts = _mf_kernel.build_consts(_constant_hamiltonian(params))

    dt = controls.dt
    for _attempt in range(controls.max_halvings + 1):
        sample_every = max(1, round(controls.sample_dt / dt))
        n_samples = max(1, round(duration / dt) // sample_every)
        rho = np.stack([initial.rho_A, initial.rho_B]).astype(np.complex128)
        out = {
            "t": np.zeros(n_samples),
            "a_A": np.zeros(n_samples, np.complex128),
            "a_B": np.zeros(n_samples, np.complex128),
            "n_A": np.zeros(n_samples),
            "n_B": np.zeros(n_samples),
            "res_A": np.zeros(n_samples),
            "res_B": np.zeros(n_samples),
            "trace_err": np.zeros(n_samples),
            "herm_err": np.zeros(n_samples),
            "min_eig": np.zeros(n_samples),
            "top_pop": np.zeros(n_samples),
        }
        common = (
            params.zJ,
            params.zV,
            params.t_ch,
            params.kappa,
            dt,
            n_samples,
            sample_every,
            initial.t,
            controls.abort_top_pop,
        )
        if backend == "numba":
            status, n_done = _mf_kernel.evolve_numba(
                rho,
                *consts,
                *common,
                out["t"],
                out["a_A"],
                out["a_B"],
                out["n_A"],
                out["n_B"],
                out["res_A"],
                out["res_B"],
                out["trace_err"],
                out["herm_err"],
                out["min_eig"],
                out["top_pop"],
            )
        else:
            status, n_done = _mf_kernel.evolve_numpy(rho, consts, *common, out)

        if status == 2:
            # do not build a state object here: past the population
            # threshold the truncated dynamics is already distorted
            raise TruncationError(
                f"top-level population reached {out['top_pop'][n_done - 1]:.2e} "
                f"(threshold {controls.abort_top_pop:g}) at "
                f"t = {out['t'][n_done - 1]:.3f} with n_max = {rho.shape[1] - 1}"
            )
        ok = (
            status == 0
            and np.all(out["trace_err"][:n_done] <= controls.tol_trace)
            and np.all(out["herm_err"][:n_done] <= controls.tol_herm)
            and np.all(out["min_eig"][:n_done] >= -controls.tol_eig)
        )
        if ok:
            return _make_trajectory(out, n_done, rho, dt)
        if dt / 2.0 < controls.min_dt:
            raise NumericalError(
                f"step size underflow: dt {dt:.2e} cannot be halved below "
                f"{controls.min_dt:.2e} (stiff or unstable system)"
            )
        dt /= 2.0

    raise NumericalError(
        "state invariants violated after "
        f"{controls.max_halvings} step halvings (worst trace err "
        f"{out['trace_err'][:n_done].max():.2e}, herm err "
        f"{out['herm_err'][:n_done].max():.2e}, min eig "
        f"{out['min_eig'][:n_done].min():.2e})"
    )


def _make_trajectory(out, n_done, rho, dt) -> Trajectory:
    final = MeanFieldState(
        rho_A=rho[0].copy(), rho_B=rho[1].copy(), t=float(out["t"][n_done - 1])
    )
    sl = slice(0, n_done)
    return Trajectory(
        times=out["t"][sl].copy(),
        a_A=out["a_A"][sl].copy(),
        a_B=out["a_B"][sl].copy(),
        n_A=out["n_A"][sl].copy(),
        n_B=out["n_B"][sl].copy(),
        residual_A=out["res_A"][sl].copy(),
        residual_B=out["res_B"][sl].copy(),
        trace_err=out["trace_err"][sl].copy(),
        herm_err=out["herm_err"][sl].copy(),
        min_eig=out["min_eig"][sl].copy(),
        top_pop=out["top_pop"][sl].copy(),
        final=final,
        dt=dt,
    )


def evolve_auto(
    params: ModelParams,
    seed: SeedSpec,
    t_final: float,
    controls: IntegratorControls = IntegratorControls(),
    trunc_tol: float = 1e-6,
    n_start: int = 10,
    n_step: int = 5,
    n_cap: int = 45,
) -> tuple[Trajectory, int]:
    """Evolve with automatic Fock-cutoff escalation.

    Hard-core mode runs at n_max = 1 with no escalation (the top level is
    physical there).  Otherwise the run starts at ``n_start`` levels and
    retries with ``n_step`` more whenever the top-level population reaches
    ``trunc_tol``, aborting the doomed attempt early.  Returns the
    trajectory and the cutoff that sufficed.
    """
    if params.hard_core:
        traj = evolve(seed_state(seed, params.space), params, t_final, controls)
        return traj, 1

    n = max(params.n_max, n_start)
    monitored = replace(controls, abort_top_pop=trunc_tol)
    while n <= n_cap:
        p = params.with_n_max(n)
        try:
            return evolve(seed_state(seed, p.space), p, t_final, monitored), n
        except TruncationError:
            n += n_step
    raise TruncationError(
        f"top-level population still >= {trunc_tol:g} at n_max {n_cap}"
    )


# ---------------------------------------------------------------------------
# classification


def order_parameter(state: MeanFieldState) -> float:
    """Occupation imbalance |<n_A> - <n_B>| of a state."""
    n_op = number(state.dim)
    return abs(
        expectation(n_op, state.rho_A).real - expectation(n_op, state.rho_B).real
    )


def _dominant_lag(x: np.ndarray, min_lag: int) -> Optional[int]:
    """Lag (in samples) of the highest autocorrelation peak, or None."""
    x = x - x.mean()
    if np.max(np.abs(x)) < 1e-13:
        return None
    ac = np.correlate(x, x, mode="full")[x.size - 1 :]
    best, best_val = None, -np.inf
    for k in range(max(min_lag, 1), ac.size - 1):
        if ac[k - 1] < ac[k] >= ac[k + 1] and ac[k] > best_val:
            best, best_val = k, ac[k]
    return best


def classify(
    traj: Trajectory, controls: ClassifierControls = ClassifierControls()
) -> PhaseLabel:
    """Decide the asymptotic phase from a trajectory.

    Over the final ``t_window`` of the trajectory: if the worst residual
    ``s = max ||rho_dot||_F`` is below ``eps_stationary`` the state is
    stationary and the time-averaged imbalance separates Uniform from
    Crystal.  Otherwise a limit cycle is sought: the dominant period comes
    from the autocorrelation of Re<a_A>, then cubic-spline interpolation of
    the four coherence components must return to the window's starting point
    within ``return_tol`` after one (refined) period.  Anything else raises
    :class:`InconclusiveError` with diagnostics.
    """
    cadence = float(np.median(np.diff(traj.times))) if len(traj.times) > 1 else 0.0
    span = traj.times[-1] - traj.times[0] + cadence
    if span + 1e-9 < controls.t_transient + controls.t_window:
        raise ConfigError(
            f"trajectory span {span:.1f} shorter than t_transient + t_window "
            f"= {controls.t_transient + controls.t_window:.1f}"
        )
    mask = traj.times >= traj.times[-1] - controls.t_window + 1e-12
    times = traj.times[mask]
    res = np.maximum(traj.residual_A[mask], traj.residual_B[mask])
    dn = np.abs(traj.n_A[mask] - traj.n_B[mask])
    s = float(res.max())
    dn_bar = float(dn.mean())

    if s < controls.eps_stationary:
        kind = Phase.CRYSTAL if dn_bar >= controls.eps_crystal else Phase.UNIFORM
        return PhaseLabel(kind=kind, delta_n=dn_bar)

    diagnostics = {"residual": s, "delta_n_bar": dn_bar}
    sample_dt = float(np.median(np.diff(times)))
    comps = np.stack(
        [
            np.real(traj.a_A[mask]),
            np.imag(traj.a_A[mask]),
            np.real(traj.a_B[mask]),
            np.imag(traj.a_B[mask]),
        ],
        axis=1,
    )
    # a decaying spiral near a fixed point also "returns" to itself once its
    # amplitude drops to the tolerance scale; demand a real cycle amplitude
    # and let the caller's longer-evolution retry settle such cases.
    amplitude = float(np.max(np.linalg.norm(comps - comps.mean(axis=0), axis=1)))
    diagnostics["cycle_amplitude"] = amplitude
    lag = _dominant_lag(np.real(traj.a_A[mask]), min_lag=3)
    if lag is not None and amplitude >= controls.min_cycle_amplitude:
        t0_period = lag * sample_dt
        diagnostics["period_estimate"] = t0_period
        # need room for one period (plus refinement margin) inside the window
        if t0_period * 1.3 < controls.t_window:
            spline = CubicSpline(times, comps, axis=0)
            t_ref = times[0]
            y_ref = spline(t_ref)

            def miss(period: float) -> float:
                return float(np.linalg.norm(spline(t_ref + period) - y_ref))

            opt = minimize_scalar(
                miss,
                bounds=(0.75 * t0_period, 1.25 * t0_period),
                method="bounded",
                options={"xatol": 1e-10},
            )
            diagnostics["return_distance"] = float(opt.fun)
            if opt.fun < controls.return_tol:
                return PhaseLabel(
                    kind=Phase.OSCILLATING,
                    delta_n=dn_bar,
                    period=float(opt.x),
                )

    err = InconclusiveError(
        f"neither stationary (residual {s:.2e}) nor recurrent within "
        f"tolerance; diagnostics: {diagnostics}"
    )
    err.diagnostics = diagnostics
    raise err
