"""Renderers: one deterministic image per job.

Input formats (headers are validated before any drawing):

- phase table   ``axis1,axis2,phase,delta_n,period,residual,n_max_used``
- boundary      ``kind,segment,axis1,axis2`` (polylines, split by segment)
- trajectory    ``t,re_a_A,im_a_A,re_a_B,im_a_B,n_A,n_B`` (extra columns
  such as the residuals are accepted and ignored)
- Wigner grid   ``x,p,W``
- correlators   ``i,j,r,g2``

Determinism: the Agg backend, fixed figure geometry, fixed color maps, and
pinned image metadata make repeated renders byte-identical.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .jobs import FigureKind, PlotJob  # noqa: E402

__all__ = ["PlotSchemaError", "render"]

BOUNDARY_STYLES = [
    dict(color="green", linestyle="--", linewidth=1.8),
    dict(color="tab:blue", linestyle="-", linewidth=1.5),
    dict(color="tab:orange", linestyle="-.", linewidth=1.5),
    dict(color="tab:red", linestyle=":", linewidth=1.8),
]

LINE_COLORS = ["tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple"]


class PlotSchemaError(Exception):
    """An input file is missing or its header does not match the format."""


def _read_rows(path: Path, required: list[str]) -> list[dict[str, str]]:
    """CSV rows as dicts; the header must start with ``required``."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise PlotSchemaError(f"{path} is empty (no header row)")
            if header[: len(required)] != required:
                raise PlotSchemaError(
                    f"{path} header {header} does not start with the "
                    f"expected columns {required}"
                )
            return [dict(zip(header, row)) for row in reader if row]
    except OSError as exc:
        raise PlotSchemaError(f"cannot read {path}: {exc}") from exc


def _floats(rows: list[dict[str, str]], column: str) -> np.ndarray:
    out = np.empty(len(rows))
    for k, row in enumerate(rows):
        text = row[column].strip()
        out[k] = float(text) if text else np.nan
    return out


def _finish(fig, job: PlotJob, ax=None) -> None:
    if ax is not None:
        if job.title:
            ax.set_title(job.title)
        if job.xlabel:
            ax.set_xlabel(job.xlabel)
        if job.ylabel:
            ax.set_ylabel(job.ylabel)
        if job.xlim:
            ax.set_xlim(*job.xlim)
        if job.ylim:
            ax.set_ylim(*job.ylim)
    job.output.parent.mkdir(parents=True, exist_ok=True)
    suffix = job.output.suffix.lower()
    if suffix == ".svg":
        with plt.rc_context({"svg.hashsalt": "plotkit"}):
            fig.savefig(job.output, dpi=job.dpi, metadata={"Date": None})
    else:
        fig.savefig(job.output, dpi=job.dpi, metadata={"Software": "plotkit"})
    plt.close(fig)


def _boundary_segments(path: Path) -> list[tuple[str, np.ndarray]]:
    rows = _read_rows(path, ["kind", "segment", "axis1", "axis2"])
    grouped: dict[tuple[str, str], list[tuple[float, float]]] = defaultdict(list)
    for row in rows:
        grouped[(row["kind"], row["segment"])].append(
            (float(row["axis1"]), float(row["axis2"]))
        )
    return [(kind, np.asarray(pts)) for (kind, _), pts in grouped.items()]


def _phase_grid(path: Path):
    rows = _read_rows(
        path,
        ["axis1", "axis2", "phase", "delta_n", "period", "residual",
         "n_max_used"],
    )
    if any(not r["axis2"].strip() for r in rows):
        raise PlotSchemaError(
            f"{path} is a one-axis table; the heatmap needs two sweep axes"
        )
    a1 = _floats(rows, "axis1")
    a2 = _floats(rows, "axis2")
    dn = _floats(rows, "delta_n")
    x = np.unique(a1)
    y = np.unique(a2)
    if x.size * y.size != len(rows):
        raise PlotSchemaError(f"{path} rows do not cover a full grid")
    # rows are written row-major with axis1 outermost
    grid = dn.reshape(x.size, y.size)
    return x, y, grid


def _render_heatmap(job: PlotJob):
    x, y, grid = _phase_grid(job.inputs[0])
    fig, ax = plt.subplots(figsize=(6.0, 4.8))
    cmap = plt.get_cmap("viridis").copy()
    cmap.set_bad("0.85")
    mesh = ax.pcolormesh(
        x, y, np.ma.masked_invalid(grid).T, cmap=cmap, shading="nearest"
    )
    fig.colorbar(mesh, ax=ax, label=r"$\Delta n$")
    for overlay in job.overlays:
        for _, points in _boundary_segments(overlay):
            ax.plot(points[:, 0], points[:, 1], **BOUNDARY_STYLES[0])
    return fig, ax


def _render_trajectory(job: PlotJob):
    rows = _read_rows(
        job.inputs[0],
        ["t", "re_a_A", "im_a_A", "re_a_B", "im_a_B", "n_A", "n_B"],
    )
    t = _floats(rows, "t")
    n_a = _floats(rows, "n_A")
    n_b = _floats(rows, "n_B")
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(t, n_a, color=LINE_COLORS[0], label=r"$\langle n_A\rangle$")
    ax.plot(t, n_b, color=LINE_COLORS[1], label=r"$\langle n_B\rangle$")
    ax.plot(
        t,
        np.abs(n_a - n_b),
        color="black",
        linestyle="--",
        linewidth=1.0,
        label=r"$\Delta n$",
    )
    ax.set_xlabel("t")
    ax.legend(loc="upper right")
    return fig, ax


def _render_wigner(job: PlotJob):
    rows = _read_rows(job.inputs[0], ["x", "p", "W"])
    xs = _floats(rows, "x")
    ps = _floats(rows, "p")
    w = _floats(rows, "W")
    x = np.unique(xs)
    p = np.unique(ps)
    if x.size * p.size != len(rows):
        raise PlotSchemaError(f"{job.inputs[0]} rows do not cover a full grid")
    grid = w.reshape(x.size, p.size)  # x outermost, matching the writer
    top = float(np.max(np.abs(grid))) or 1.0
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    levels = np.linspace(-top, top, 41)
    fill = ax.contourf(x, p, grid.T, levels=levels, cmap="RdBu_r")
    fig.colorbar(fill, ax=ax, label="W")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    return fig, ax


def _render_g2(job: PlotJob):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.axhline(1.0, color="0.6", linestyle=":", linewidth=1.0)
    for idx, path in enumerate(job.inputs):
        rows = _read_rows(path, ["i", "j", "r", "g2"])
        by_r: dict[int, list[float]] = defaultdict(list)
        for row in rows:
            r = int(row["r"])
            if r >= 1:
                by_r[r].append(float(row["g2"]))
        if not by_r:
            raise PlotSchemaError(f"{path} has no off-site correlator rows")
        dists = sorted(by_r)
        means = [float(np.mean(by_r[r])) for r in dists]
        color = LINE_COLORS[idx % len(LINE_COLORS)]
        label = job.labels[idx] if job.labels else path.stem
        for r in dists:
            ax.plot([r] * len(by_r[r]), by_r[r], ".", color=color,
                    markersize=3, alpha=0.5)
        ax.plot(dists, means, "o-", color=color, label=label)
    ax.set_xlabel("distance r")
    ax.set_ylabel(r"$g^{(2)}(r)$")
    ax.legend()
    return fig, ax


def _render_boundary_comparison(job: PlotJob):
    fig, ax = plt.subplots(figsize=(6.0, 4.8))
    for idx, path in enumerate(job.inputs):
        style = BOUNDARY_STYLES[idx % len(BOUNDARY_STYLES)]
        label = job.labels[idx] if job.labels else path.stem
        first = True
        for _, points in _boundary_segments(path):
            ax.plot(
                points[:, 0],
                points[:, 1],
                label=label if first else None,
                **style,
            )
            first = False
    ax.legend()
    return fig, ax


_RENDERERS = {
    FigureKind.HEATMAP: _render_heatmap,
    FigureKind.TRAJECTORY: _render_trajectory,
    FigureKind.WIGNER: _render_wigner,
    FigureKind.G2_DISTANCE: _render_g2,
    FigureKind.BOUNDARY_COMPARISON: _render_boundary_comparison,
}


def render(job: PlotJob) -> Path:
    """Draw one job and return the written image path."""
    fig, ax = _RENDERERS[job.kind](job)
    _finish(fig, job, ax)
    return job.output
