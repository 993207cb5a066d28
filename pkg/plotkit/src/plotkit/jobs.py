"""Job descriptions: what to draw, from which files, to where."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


class FigureKind(enum.Enum):
    """The figure families understood by :func:`plotkit.render`.

    HEATMAP             order-parameter map from a two-axis phase table,
                        with optional dashed boundary overlays
    TRAJECTORY          occupations and coherences of one mean-field run
    WIGNER              phase-space contour map of one Wigner grid
    G2_DISTANCE         pair correlator versus graph distance, one line
                        per input file
    BOUNDARY_COMPARISON phase-boundary polylines from several files on
                        common axes
    """

    HEATMAP = "heatmap"
    TRAJECTORY = "trajectory"
    WIGNER = "wigner"
    G2_DISTANCE = "g2_distance"
    BOUNDARY_COMPARISON = "boundary_comparison"


@dataclass(frozen=True)
class PlotJob:
    """One rendering task.

    ``inputs`` are CSVs in the simulator's documented formats (phase table,
    trajectory, Wigner grid, pair-correlator table, or boundary polylines —
    see each kind's renderer for the expected header).  ``overlays`` are
    boundary CSVs drawn on top of a heatmap.  ``labels`` name the per-file
    lines where a kind draws several.  Axis labels and ranges are optional
    presentation hints; data is never clipped silently except by ``xlim`` /
    ``ylim``.
    """

    kind: FigureKind
    inputs: tuple[Path, ...]
    output: Path
    overlays: tuple[Path, ...] = ()
    labels: tuple[str, ...] = ()
    title: Optional[str] = None
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None
    xlim: Optional[tuple[float, float]] = None
    ylim: Optional[tuple[float, float]] = None
    dpi: int = 150

    def __post_init__(self) -> None:
        object.__setattr__(self, "inputs", tuple(Path(p) for p in self.inputs))
        object.__setattr__(self, "overlays", tuple(Path(p) for p in self.overlays))
        object.__setattr__(self, "output", Path(self.output))
        if not self.inputs:
            raise ValueError("a plot job needs at least one input file")
        if self.labels and len(self.labels) != len(self.inputs):
            raise ValueError("labels, when given, must match inputs one-to-one")
        if self.dpi <= 0:
            raise ValueError("dpi must be positive")
