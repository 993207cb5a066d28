"""Hard-core phase diagram over (detuning, cross-Kerr) with boundaries.

Sweeps a delta x zV grid at fixed drive, classifies every node, and writes
the phase table, the extracted crystal boundary, and the analytic
instability curve (same CSV format, overlay-ready) alongside it.  Grid
sizes are kept coarse enough to finish in minutes on a laptop; pass --fine
for the denser version.
"""

import argparse
from pathlib import Path

import numpy as np

from kerrlattice import (
    AsymmetricCoherent,
    AxisSpec,
    IntegratorControls,
    ModelParams,
    SweepSpec,
    critical_V_analytic,
    extract_boundary,
    run_sweep,
)
from kerrlattice.model import CriticalLimit


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--output-dir", type=Path, default=Path("results"))
    parser.add_argument("--fine", action="store_true", help="41x41 grid")
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()
    args.output_dir.mkdir(parents=True, exist_ok=True)

    n = 41 if args.fine else 17
    spec = SweepSpec(
        base=ModelParams(omega=0.75, zJ=0.0, hard_core=True),
        axis1=AxisSpec(name="delta", start=-1.0, stop=1.0, n_points=n),
        axis2=AxisSpec(name="zV", start=2.0, stop=10.0, n_points=n),
        seed=AsymmetricCoherent(0.1, 0.0),
        t_final=300.0,
        integrator=IntegratorControls(backend="numba", dt=0.002),
        output_path=args.output_dir / "hard_core_phase_diagram.csv",
        workers=args.workers,
    )
    table = run_sweep(spec)  # writes the CSV + sidecar via output_path

    lines = ["kind,segment,axis1,axis2"]
    for seg, boundary in enumerate(extract_boundary(table)):
        for x, y in boundary.points:
            lines.append(f"{boundary.kind},{seg},{float(x)!r},{float(y)!r}")
    boundary_path = args.output_dir / "hard_core_boundary.csv"
    boundary_path.write_text("\n".join(lines) + "\n")

    lines = ["kind,segment,axis1,axis2"]
    for delta in np.linspace(-1.0, 1.0, 201):
        zv_c = critical_V_analytic(delta, 0.75, CriticalLimit.HARD_CORE)
        lines.append(f"analytic,0,{float(delta)!r},{float(zv_c)!r}")
    analytic_path = args.output_dir / "hard_core_boundary_analytic.csv"
    analytic_path.write_text("\n".join(lines) + "\n")

    counts: dict[str, int] = {}
    for row in table.rows:
        counts[row.phase] = counts.get(row.phase, 0) + 1
    print(
        f"wrote {spec.output_path}, {boundary_path} and {analytic_path}; "
        f"node counts: {counts}"
    )


if __name__ == "__main__":
    main()
