"""Parameter-plane sweeps: grid classification, tables, phase boundaries.

A sweep evolves and classifies one mean-field trajectory per grid node,
collects the results into a deterministic row-major table, and can write
that table as CSV (with a JSON sidecar recording the resolved sweep
specification and package version).  Boundary extraction runs marching
squares over the order-parameter grid.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np
from skimage.measure import find_contours

from . import __version__
from .dynamics import (
    ClassifierControls,
    FockOccupation,
    IntegratorControls,
    SeedSpec,
    SymmetricVacuum,
    classify,
    evolve_auto,
)
from .errors import ConfigError, InconclusiveError, NumericalError
from .model import ModelParams

__all__ = [
    "AxisSpec",
    "Boundary",
    "PhaseRow",
    "PhaseTable",
    "SweepSpec",
    "extract_boundary",
    "run_sweep",
]

CSV_HEADER = "axis1,axis2,phase,delta_n,period,residual,n_max_used"
PARAM_AXES = ("delta", "omega", "zJ", "U", "zV", "t_ch")
SEED_AXES = ("n_A0", "n_B0")
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class AxisSpec:
    """One swept parameter: a uniform grid of values."""

    name: str
    start: float
    stop: float
    n_points: int

    def __post_init__(self) -> None:
        if self.name not in PARAM_AXES + SEED_AXES:
            raise ConfigError(
                f"unknown axis {self.name!r}; choose from "
                f"{PARAM_AXES + SEED_AXES}"
            )
        if self.n_points < 2:
            raise ConfigError("an axis needs at least 2 points")
        if not self.stop > self.start:
            raise ConfigError("axis stop must exceed start")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n_points)


@dataclass(frozen=True)
class SweepSpec:
    """Everything needed to reproduce a sweep bit-for-bit."""

    base: ModelParams
    axis1: AxisSpec
    axis2: Optional[AxisSpec] = None
    seed: SeedSpec = SymmetricVacuum()
    t_final: float = 300.0
    integrator: IntegratorControls = IntegratorControls()
    classifier: ClassifierControls = ClassifierControls()
    output_path: Optional[Union[str, Path]] = None
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        axes = [self.axis1] + ([self.axis2] if self.axis2 else [])
        names = [ax.name for ax in axes]
        if len(set(names)) != len(names):
            raise ConfigError("axis1 and axis2 must name distinct parameters")
        if any(n in SEED_AXES for n in names) and not isinstance(
            self.seed, FockOccupation
        ):
            raise ConfigError(
                "occupation axes (n_A0/n_B0) require a FockOccupation seed"
            )
        if self.t_final < self.classifier.t_transient + self.classifier.t_window:
            raise ConfigError(
                "t_final shorter than the classifier transient plus window"
            )
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axis1.n_points, self.axis2.n_points if self.axis2 else 1)


@dataclass(frozen=True)
class PhaseRow:
    """One classified grid node."""

    axis1: float
    axis2: Optional[float]
    phase: str
    delta_n: float
    period: Optional[float]
    residual: float
    n_max_used: Optional[int]


@dataclass(frozen=True)
class PhaseTable:
    """Complete sweep result, row-major over (axis1, axis2)."""

    spec: SweepSpec
    rows: tuple[PhaseRow, ...]

    def __post_init__(self) -> None:
        n1, n2 = self.spec.shape
        if len(self.rows) != n1 * n2:
            raise ConfigError(
                f"table has {len(self.rows)} rows, grid needs {n1 * n2}"
            )

    def grid(self, field: str) -> np.ndarray:
        """A row field as a float (n_axis1, n_axis2) array; None becomes NaN."""
        vals = [
            np.nan if getattr(r, field) is None else float(getattr(r, field))
            for r in self.rows
        ]
        return np.array(vals).reshape(self.spec.shape)

    def phase_grid(self) -> np.ndarray:
        return np.array([r.phase for r in self.rows]).reshape(self.spec.shape)

    def to_csv_text(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                ",".join(
                    (
                        repr(float(r.axis1)),
                        "" if r.axis2 is None else repr(float(r.axis2)),
                        r.phase,
                        repr(float(r.delta_n)),
                        "" if r.period is None else repr(float(r.period)),
                        repr(float(r.residual)),
                        "" if r.n_max_used is None else str(r.n_max_used),
                    )
                )
            )
        return "\n".join(lines) + "\n"


def _seed_to_dict(seed: SeedSpec) -> dict:
    out = {"kind": type(seed).__name__}
    data = asdict(seed)
    out.update(
        {
            k: (
                {"real": v.real, "imag": v.imag}
                if isinstance(v, complex)
                else v
            )
            for k, v in data.items()
        }
    )
    return out


def spec_to_dict(spec: SweepSpec) -> dict:
    """JSON-ready description of a sweep (for the sidecar and provenance)."""
    return {
        "base": asdict(spec.base),
        "axis1": asdict(spec.axis1),
        "axis2": None if spec.axis2 is None else asdict(spec.axis2),
        "seed": _seed_to_dict(spec.seed),
        "t_final": spec.t_final,
        "integrator": asdict(spec.integrator),
        "classifier": asdict(spec.classifier),
        "output_path": None
        if spec.output_path is None
        else str(spec.output_path),
        "workers": spec.workers,
        "version": __version__,
    }


def _node_inputs(
    spec: SweepSpec, v1: float, v2: Optional[float]
) -> tuple[ModelParams, SeedSpec]:
    params, seed = spec.base, spec.seed
    for axis, value in ((spec.axis1, v1), (spec.axis2, v2)):
        if axis is None:
            continue
        if axis.name in PARAM_AXES:
            params = replace(params, **{axis.name: float(value)})
        else:
            seed = replace(seed, **{axis.name: float(value)})
    return params, seed


def _window_residual(traj, t_window: float) -> float:
    mask = traj.times >= traj.times[-1] - t_window + 1e-12
    return float(
        np.maximum(traj.residual_A[mask], traj.residual_B[mask]).max()
    )


def _classify_node(spec: SweepSpec, v1: float, v2: Optional[float]) -> PhaseRow:
    params, seed = _node_inputs(spec, v1, v2)
    t_final = spec.t_final
    try:
        traj, n_used = evolve_auto(params, seed, t_final, spec.integrator)
        try:
            label = classify(traj, spec.classifier)
        except InconclusiveError:
            # one retry with a doubled horizon: critical slowing down near
            # phase boundaries routinely needs the extra time
            t_final *= 2
            traj, n_used = evolve_auto(params, seed, t_final, spec.integrator)
            label = classify(traj, spec.classifier)
        return PhaseRow(
            axis1=float(v1),
            axis2=None if v2 is None else float(v2),
            phase=label.kind.value,
            delta_n=label.delta_n,
            period=label.period,
            residual=_window_residual(traj, spec.classifier.t_window),
            n_max_used=n_used,
        )
    except InconclusiveError as exc:
        diag = getattr(exc, "diagnostics", {})
        return PhaseRow(
            axis1=float(v1),
            axis2=None if v2 is None else float(v2),
            phase=INCONCLUSIVE,
            delta_n=float(diag.get("delta_n_bar", np.nan)),
            period=None,
            residual=float(diag.get("residual", np.nan)),
            n_max_used=n_used,
        )
    except NumericalError:
        return PhaseRow(
            axis1=float(v1),
            axis2=None if v2 is None else float(v2),
            phase=INCONCLUSIVE,
            delta_n=np.nan,
            period=None,
            residual=np.nan,
            n_max_used=None,
        )


def _classify_node_star(args) -> PhaseRow:
    return _classify_node(*args)


def _resolve_workers(spec: SweepSpec) -> int:
    if spec.workers is not None:
        return spec.workers
    env = os.environ.get("KERRLATTICE_WORKERS", "")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(
                f"KERRLATTICE_WORKERS must be an integer, got {env!r}"
            ) from exc
        if n < 1:
            raise ConfigError("KERRLATTICE_WORKERS must be positive")
        return n
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec) -> PhaseTable:
    """Classify every grid node; optionally write CSV plus JSON sidecar.

    Rows come out row-major over (axis1, axis2) regardless of how workers
    finish, so identical specs produce byte-identical CSV files.  Nodes
    whose classification fails (still inconclusive after the doubled-time
    retry, or numerically unsalvageable) are recorded as ``inconclusive``
    rows; the grid never aborts half-way.
    """
    v2s = spec.axis2.values if spec.axis2 else [None]
    tasks = [(spec, v1, v2) for v1 in spec.axis1.values for v2 in v2s]
    workers = _resolve_workers(spec)
    if workers == 1:
        rows = [_classify_node_star(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_classify_node_star, tasks))
    table = PhaseTable(spec=spec, rows=tuple(rows))
    if spec.output_path is not None:
        write_table(table, spec.output_path)
    return table


def write_table(table: PhaseTable, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        path.write_text(table.to_csv_text())
        sidecar = path.with_suffix(".json")
        sidecar.write_text(
            json.dumps(spec_to_dict(table.spec), indent=2, sort_keys=True)
            + "\n"
        )
    except OSError as exc:
        raise ConfigError(f"output path {path} is not writable: {exc}") from exc


class Boundary(NamedTuple):
    """One extracted phase-boundary polyline in axis coordinates."""

    kind: str
    points: np.ndarray  # (k, 2) columns (axis1 value, axis2 value)


def extract_boundary(table: PhaseTable, epsilon: float = 1e-3) -> list[Boundary]:
    """Marching-squares boundaries of the Crystal and Oscillating regions.

    The crystal boundary is the ``delta_n = epsilon`` contour; the
    oscillating boundary is the 0.5-contour of that region's indicator.
    Inconclusive nodes are masked out, which breaks contours into segments
    around them.  Empty regions yield no polylines.
    """
    if table.spec.axis2 is None:
        raise ConfigError("boundary extraction needs a two-axis sweep")
    dn = table.grid("delta_n")
    conclusive = np.array(
        [r.phase != INCONCLUSIVE for r in table.rows]
    ).reshape(dn.shape)
    osc = (table.phase_grid() == "oscillating").astype(float)

    axis1, axis2 = table.spec.axis1, table.spec.axis2
    scale1 = (axis1.stop - axis1.start) / (axis1.n_points - 1)
    scale2 = (axis2.stop - axis2.start) / (axis2.n_points - 1)

    def to_axis_coords(contour: np.ndarray) -> np.ndarray:
        out = np.empty_like(contour)
        out[:, 0] = axis1.start + contour[:, 0] * scale1
        out[:, 1] = axis2.start + contour[:, 1] * scale2
        return out

    boundaries = []
    with np.errstate(invalid="ignore"):
        for contour in find_contours(dn, epsilon, mask=conclusive):
            boundaries.append(Boundary("crystal", to_axis_coords(contour)))
        for contour in find_contours(osc, 0.5, mask=conclusive):
            boundaries.append(Boundary("oscillating", to_axis_coords(contour)))
    return boundaries
