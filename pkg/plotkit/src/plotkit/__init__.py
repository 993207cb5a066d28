"""Deterministic figure rendering for kerrlattice CSV outputs.

A pure file-to-file layer: each :class:`PlotJob` names input CSVs (in the
formats the simulator's CLI and sweep runner write), a figure kind, and an
output image path; :func:`render` draws it.  No physics is computed here —
every number plotted comes from the input files.  Rendering is
deterministic: the same inputs produce byte-identical images.
"""

from .jobs import FigureKind, PlotJob
from .render import PlotSchemaError, render

__version__ = "0.1.0"

__all__ = ["FigureKind", "PlotJob", "PlotSchemaError", "render", "__version__"]
