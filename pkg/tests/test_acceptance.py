"""Acceptance suite: physics-level checks of the whole stack.

Each class pins one headline result — phase-transition thresholds, the
oscillating phase, bistability, exact-chain correlations, mean-field
exactness at decoupling, the correlated-hopping boundary shift, circuit
identities, and physicality of every integrator sample.  These run the
public APIs end to end and take tens of minutes in total; the exact-chain
checks at Fock dimension 1024 dominate.
"""

import math
import os

import numpy as np
import pytest

from kerrlattice.circuit import (
    CancellationTarget,
    FLUX_QUANTUM_REDUCED,
    derive,
    solve_cancellation,
)
from kerrlattice.dynamics import (
    AsymmetricCoherent,
    ClassifierControls,
    FockOccupation,
    IntegratorControls,
    Phase,
    SymmetricVacuum,
    classify,
    evolve,
    evolve_auto,
)
from kerrlattice.errors import InconclusiveError
from kerrlattice.lattice import (
    LatticeSpec,
    SteadyStateMethod,
    g2,
    g2_by_distance,
    steady_state,
)
from kerrlattice.model import CriticalLimit, ModelParams, critical_V_analytic
from kerrlattice.observables import trace_distance, wigner
from kerrlattice.sweep import AxisSpec, SweepSpec, run_sweep

JIT = IntegratorControls(backend="numba", dt=0.002)
SYMMETRY_BREAKING = AsymmetricCoherent(0.1, 0.0)


@pytest.fixture(scope="module", autouse=True)
def warm_jit():
    """Compile the integrator once in the parent so forked sweep workers
    inherit the machine code instead of re-JITing per process."""
    p = ModelParams(omega=0.3, hard_core=True)
    evolve_auto(p, SymmetricVacuum(), 5.0, JIT)


def conclusive_bracket(table, lower=Phase.UNIFORM, upper=Phase.CRYSTAL):
    """Largest axis value in the lower phase and smallest in the upper.

    Requires clean separation: every conclusive lower-phase node below
    every conclusive upper-phase node.
    """
    lo = [r.axis1 for r in table.rows if r.phase == lower.value]
    hi = [r.axis1 for r in table.rows if r.phase == upper.value]
    assert lo and hi, "both phases must appear in the sweep"
    assert max(lo) < min(hi), "phases must separate along the axis"
    return max(lo), min(hi)


class TestHardCoreThreshold:
    def test_uniform_to_crystal_transition(self):
        spec = SweepSpec(
            base=ModelParams(delta=0.0, omega=0.75, zJ=0.0, hard_core=True),
            axis1=AxisSpec(name="zV", start=4.0, stop=8.0, n_points=81),
            seed=SYMMETRY_BREAKING,
            t_final=300.0,
            integrator=JIT,
        )
        table = run_sweep(spec)
        last_uniform, first_crystal = conclusive_bracket(table)
        assert first_crystal - last_uniform < 0.35  # sharp bracket
        midpoint = 0.5 * (last_uniform + first_crystal)
        assert abs(midpoint - 5.73) <= 0.05 * 5.73

    def test_analytic_formula_value(self):
        value = critical_V_analytic(0.0, 0.75, CriticalLimit.HARD_CORE)
        assert abs(value - 5.733) < 1e-3


class TestWeakKerrThreshold:
    def test_uniform_to_crystal_transition_at_zero_U(self):
        spec = SweepSpec(
            base=ModelParams(delta=0.0, omega=0.75, zJ=0.0, U=0.0, n_max=10),
            axis1=AxisSpec(name="zV", start=0.2, stop=0.8, n_points=61),
            seed=SYMMETRY_BREAKING,
            t_final=300.0,
            integrator=JIT,
        )
        table = run_sweep(spec)
        conclusive = [r for r in table.rows if r.phase != "inconclusive"]
        assert len(conclusive) > 45  # critical slowing may cost a few nodes
        last_uniform, first_crystal = conclusive_bracket(table)
        assert first_crystal - last_uniform < 0.08
        midpoint = 0.5 * (last_uniform + first_crystal)
        assert abs(midpoint - 0.44) <= 0.05 * 0.44

    def test_analytic_formula_value(self):
        value = critical_V_analytic(0.0, 0.75, CriticalLimit.FREE_U0)
        assert abs(value - 0.444) < 1e-3


OSCILLATING_PARAMS = ModelParams(
    delta=0.9, omega=0.75, zJ=0.2, U=0.0, zV=0.6, n_max=15
)


@pytest.fixture(scope="module")
def cycle():
    traj, n_used = evolve_auto(OSCILLATING_PARAMS, SYMMETRY_BREAKING, 300.0, JIT)
    label = classify(traj)
    return traj, label, n_used


class TestOscillatingPhase:

    def test_classified_oscillating_with_sublattice_imbalance(self, cycle):
        traj, label, _ = cycle
        assert label.kind is Phase.OSCILLATING
        assert label.period is not None and label.period > 0
        assert label.delta_n > ClassifierControls().eps_crystal
        # the sublattices trace distinct coherences over the cycle
        window = traj.times >= traj.times[-1] - label.period
        assert np.max(np.abs(traj.a_A[window] - traj.a_B[window])) > 0.1

    def test_wigner_nonnegative_around_the_cycle(self, cycle):
        traj, label, n_used = cycle
        xs = np.linspace(-4.5, 4.5, 61)
        fixed = OSCILLATING_PARAMS.with_n_max(n_used)
        state = traj.final
        for _ in range(4):
            for rho in (state.rho_A, state.rho_B):
                grid = wigner(rho, xs, xs)
                assert grid.values.min() > -1e-3 * grid.values.max()
            state = evolve(state, fixed, state.t + label.period / 4, JIT).final


class TestBistability:
    PARAMS = ModelParams(delta=0.8, omega=2.0, zJ=6.2, zV=0.0, hard_core=True)

    def label_for(self, seed):
        traj, _ = evolve_auto(self.PARAMS, seed, 600.0, JIT)
        return classify(traj)

    def test_crystal_branch_from_single_photon_seed(self):
        label = self.label_for(FockOccupation(1.0, 0.0))
        assert label.kind is Phase.CRYSTAL
        assert abs(label.delta_n - 0.1027) <= 0.02 * 0.1027

    def test_uniform_branch_from_vacuum(self):
        label = self.label_for(SymmetricVacuum())
        assert label.kind is Phase.UNIFORM
        assert label.delta_n < 1e-6

    def test_crystal_branch_independent_of_seed(self):
        a = self.label_for(FockOccupation(1.0, 0.0))
        b = self.label_for(FockOccupation(0.9, 0.05))
        assert a.kind is Phase.CRYSTAL and b.kind is Phase.CRYSTAL
        assert abs(a.delta_n - b.delta_n) < 1e-3


class TestChainCorrelations:
    """Exact 5-site open chain at local cutoff 3 (dimension 1024)."""

    SPEC = LatticeSpec(n_sites=5, n_max=3)

    @staticmethod
    def chain_state(J, U, V):
        params = ModelParams(delta=0.0, omega=0.4, zJ=J, U=U, zV=V, t_ch=0.0)
        return steady_state(
            TestChainCorrelations.SPEC, params, SteadyStateMethod.LONG_TIME
        )

    def test_no_cross_kerr_factorizes(self):
        state = self.chain_state(J=0.0, U=0.5, V=0.0)
        for i in range(5):
            for j in range(i + 1, 5):
                assert abs(g2(state, i, j) - 1.0) < 1e-6

    @pytest.mark.parametrize("V", [0.5, 1.0])
    def test_cross_kerr_staggers_correlations(self, V):
        state = self.chain_state(J=0.0, U=0.5, V=V)
        by_r = g2_by_distance(state)
        signs = {np.sign((-1.0) ** r * (by_r[r] - 1.0)) for r in (1, 2, 3)}
        assert 0.0 not in signs, "staggering amplitude must be resolved"
        assert len(signs) == 1, "alternation sign must be constant"

    def test_hopping_shrinks_correlation_range(self):
        def correlation_range(by_r):
            far = [r for r, val in by_r.items() if abs(val - 1.0) > 0.01]
            return max(far) if far else 0

        tables = {
            J: g2_by_distance(self.chain_state(J=J, U=1.0, V=1.0))
            for J in (0.0, 0.3, 1.0)
        }
        ranges = [correlation_range(tables[J]) for J in (0.0, 0.3, 1.0)]
        assert ranges[0] >= 1, "correlations must exist without hopping"
        assert ranges[0] >= ranges[1] >= ranges[2], (
            f"threshold-crossing range grew with hopping: {ranges}; "
            f"g2 by distance: { {J: {r: round(v, 6) for r, v in t.items()} for J, t in tables.items()} }"
        )


class TestMeanFieldExactnessAtDecoupling:
    GRID = [(d, om) for d in (0.0, 0.4, 0.8) for om in (0.3, 0.6, 0.9)]

    @pytest.mark.parametrize("U", [0.0, 0.7])
    def test_matches_single_cavity_null_space(self, U):
        spec = LatticeSpec(n_sites=1, n_max=20)
        for delta, omega in self.GRID:
            params = ModelParams(
                delta=delta, omega=omega, U=U, zJ=0.0, zV=0.0, n_max=20
            )
            traj, _ = evolve_auto(params, SYMMETRY_BREAKING, 60.0, JIT)
            oracle = steady_state(spec, params, SteadyStateMethod.NULL_SPACE)
            for rho in (traj.final.rho_A, traj.final.rho_B):
                assert trace_distance(rho, oracle.rho) < 1e-8

    def test_linear_cavity_closed_form(self):
        a_op = np.diag(np.sqrt(np.arange(1, 21)), k=1)
        for delta, omega in self.GRID:
            params = ModelParams(delta=delta, omega=omega, U=0.0, n_max=20)
            traj, _ = evolve_auto(params, SymmetricVacuum(), 60.0, JIT)
            measured = np.trace(traj.final.rho_A @ a_op)
            assert abs(measured - omega / (delta + 0.5j)) < 1e-7


class TestCorrelatedHoppingShift:
    """Occupation-dependent tunneling displaces the crystal boundary."""

    CLASSIFIER = ClassifierControls(t_transient=200.0, t_window=80.0)

    def is_crystal(self, zV, U, t_ch):
        params = ModelParams(delta=0.0, omega=0.75, zJ=0.0, U=U, zV=zV, t_ch=t_ch)
        diag = None
        for t_final in (300.0, 600.0):
            traj, _ = evolve_auto(params, SYMMETRY_BREAKING, t_final, JIT)
            try:
                return classify(traj, self.CLASSIFIER).kind is not Phase.UNIFORM
            except InconclusiveError as exc:
                diag = exc.diagnostics
        return diag["delta_n_bar"] > self.CLASSIFIER.eps_crystal

    def boundary(self, U, t_ch, lo=0.05, hi=6.0):
        assert not self.is_crystal(lo, U, t_ch)
        assert self.is_crystal(hi, U, t_ch)
        for _ in range(8):
            mid = 0.5 * (lo + hi)
            if self.is_crystal(mid, U, t_ch):
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    @pytest.mark.parametrize("U", [0.5, 1.0, 1.5])
    def test_boundary_exists_and_moves(self, U):
        plain = self.boundary(U, t_ch=0.0)
        shifted = self.boundary(U, t_ch=-U)
        assert abs(shifted - plain) > 0.05


class TestCircuitIdentities:
    def test_interaction_ratio_and_cancellation(self):
        rng = np.random.default_rng(20260815)
        for k in range(100):
            C = 10 ** rng.uniform(-14.0, -12.5)
            L = 10 ** rng.uniform(-9.5, -8.0)
            z = int(rng.integers(1, 7))
            if k % 2 == 0:
                C_J = 10 ** rng.uniform(-15.5, -13.5)
                circuit = solve_cancellation(
                    C, L, z, CancellationTarget.E_J, C_J=C_J
                )
            else:
                # keep L_J > 2L so the capacitance solution exists
                E_J = FLUX_QUANTUM_REDUCED**2 / (
                    2.0 * L * rng.uniform(1.5, 50.0)
                )
                circuit = solve_cancellation(
                    C, L, z, CancellationTarget.C_J, E_J=E_J
                )
            d = derive(circuit)
            assert (circuit.z * d.V) / d.U == 4.0
            assert abs(d.X_minus) < 1e-12


class TestPhysicalitySuite:
    def test_invariants_hold_at_every_sample(self):
        rng = np.random.default_rng(7)
        for k in range(20):
            hard_core = k % 4 == 0
            params = ModelParams(
                delta=float(rng.uniform(0.0, 1.5)),
                omega=float(rng.uniform(0.2, 1.5)),
                zJ=float(rng.uniform(0.0, 2.0)),
                U=0.0 if hard_core else float(rng.uniform(0.0, 2.0)),
                zV=float(rng.uniform(0.0, 8.0)),
                hard_core=hard_core,
            )
            seed = AsymmetricCoherent(
                complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
                complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)),
            )
            traj, _ = evolve_auto(params, seed, 50.0, JIT)
            assert np.max(traj.trace_err) < 1e-8
            assert np.max(traj.herm_err) < 1e-10
            assert np.min(traj.min_eig) > -1e-8
