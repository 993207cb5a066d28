"""Driven-dissipative cavity arrays with cross-Kerr coupling.

Two complementary engines:

* a two-sublattice mean-field Lindblad integrator (:mod:`.dynamics`) that
  maps out the steady-state phase diagram — uniform, photon-crystal, and
  oscillating phases — over lattice-scale parameter sweeps, and
* an exact few-site master-equation solver (:mod:`.lattice`) used as the
  correctness oracle for the mean-field results and for density-density
  correlation studies on small chains.

Supporting layers: truncated Fock-space operators (:mod:`.fock`), the model
Hamiltonian and Lindblad right-hand side (:mod:`.model`), observables and
Wigner reconstruction (:mod:`.observables`), a circuit-parameter map from
lumped-element circuit QED values to model couplings (:mod:`.circuit`),
parameter sweeps with phase classification (:mod:`.sweep`), and a JSON-config
CLI (:mod:`.cli`).
"""

__version__ = "0.1.0"

from .circuit import (  # noqa: E402
    CancellationTarget,
    CircuitDerived,
    CircuitParams,
    derive,
    solve_cancellation,
)
from .dynamics import (  # noqa: E402
    AsymmetricCoherent,
    ClassifierControls,
    FockOccupation,
    IntegratorControls,
    MeanFieldState,
    Phase,
    PhaseLabel,
    SeedSpec,
    SymmetricVacuum,
    Trajectory,
    classify,
    evolve,
    evolve_auto,
    order_parameter,
    seed_state,
)
from .errors import (  # noqa: E402
    ConfigError,
    InconclusiveError,
    KerrLatticeError,
    MultistabilityError,
    NumericalError,
    TruncationError,
    UndefinedCorrelatorError,
)
from .fock import FockSpace  # noqa: E402
from .lattice import (  # noqa: E402
    Geometry,
    LatticeSpec,
    LatticeState,
    SteadyStateMethod,
    build_lattice_hamiltonian,
    g2,
    g2_by_distance,
    g2_table,
    occupation,
    reduced_density,
    steady_state,
)
from .model import CriticalLimit, ModelParams, critical_V_analytic  # noqa: E402
from .observables import WignerGrid, mf_expectations, trace_distance, wigner  # noqa: E402
from .sweep import (  # noqa: E402
    AxisSpec,
    Boundary,
    PhaseRow,
    PhaseTable,
    SweepSpec,
    extract_boundary,
    run_sweep,
    write_table,
)

__all__ = [
    "__version__",
    # circuit
    "CancellationTarget",
    "CircuitDerived",
    "CircuitParams",
    "derive",
    "solve_cancellation",
    # dynamics
    "AsymmetricCoherent",
    "ClassifierControls",
    "FockOccupation",
    "IntegratorControls",
    "MeanFieldState",
    "Phase",
    "PhaseLabel",
    "SeedSpec",
    "SymmetricVacuum",
    "Trajectory",
    "classify",
    "evolve",
    "evolve_auto",
    "order_parameter",
    "seed_state",
    # errors
    "ConfigError",
    "InconclusiveError",
    "KerrLatticeError",
    "MultistabilityError",
    "NumericalError",
    "TruncationError",
    "UndefinedCorrelatorError",
    # fock
    "FockSpace",
    # lattice
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
    "steady_state",
    # model
    "CriticalLimit",
    "ModelParams",
    "critical_V_analytic",
    # observables
    "WignerGrid",
    "mf_expectations",
    "trace_distance",
    "wigner",
    # sweep
    "AxisSpec",
    "Boundary",
    "PhaseRow",
    "PhaseTable",
    "SweepSpec",
    "extract_boundary",
    "run_sweep",
    "write_table",
]
