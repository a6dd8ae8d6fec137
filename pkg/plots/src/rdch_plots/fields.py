"""Field snapshot figures: 1D curve overlays, 2D per-variable heatmaps."""

from __future__ import annotations

from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, find_snapshots, load_snapshot
from .jobs import PlotJob

VARIABLES = ("n", "w", "mu", "p")


def _frame_path(output: Path, index: int, total: int) -> Path:
    if total == 1:
        return output
    return output.with_name(f"{output.stem}_{index:04d}{output.suffix}")


def _sequence_ranges(snaps: list[dict]) -> dict[str, tuple[float, float]]:
    """Shared per-variable value range across the whole snapshot sequence."""
    out = {}
    for var in VARIABLES:
        lo = min(float(np.min(s[var])) for s in snaps)
        hi = max(float(np.max(s[var])) for s in snaps)
        if hi <= lo:
            hi = lo + 1.0
        out[var] = (lo, hi)
    return out


def plot_fields(job: PlotJob) -> list[Path]:
    """Render every snapshot in the run directory; returns the written paths.

    A single snapshot lands exactly at the job output path; a sequence gets
    one frame per snapshot with a numeric suffix and a color/value scale
    shared across the sequence.
    """
    paths = find_snapshots(job.input_dir)
    if not paths:
        raise SchemaError(f"no snapshot_*.csv in {job.input_dir}")
    snaps = [load_snapshot(p) for p in paths]
    two_d = "y" in snaps[0]
    ranges = _sequence_ranges(snaps)
    written = []
    job.output.parent.mkdir(parents=True, exist_ok=True)
    for idx, snap in enumerate(snaps):
        if two_d:
            fig = _render_2d(snap, ranges, job)
        else:
            fig = _render_1d(snap, ranges, job)
        out = _frame_path(job.output, idx, len(snaps))
        fig.savefig(out, dpi=job.dpi)
        plt.close(fig)
        written.append(out)
    return written


def _render_1d(snap: dict, ranges: dict, job: PlotJob):
    fig, ax = plt.subplots(figsize=job.figsize)
    for var in VARIABLES:
        ax.plot(snap["x"], snap[var], label=var, lw=1.4)
    lo = min(r[0] for r in ranges.values())
    hi = max(r[1] for r in ranges.values())
    pad = 0.05 * (hi - lo)
    ax.set_ylim(lo - pad, hi + pad)
    ax.set_xlabel("x")
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def _render_2d(snap: dict, ranges: dict, job: PlotJob):
    xs = np.unique(snap["x"])
    ys = np.unique(snap["y"])
    fig, axes = plt.subplots(2, 2, figsize=job.figsize)
    for ax, var in zip(axes.ravel(), VARIABLES):
        grid = snap[var].reshape(len(xs), len(ys))
        vmin, vmax = ranges[var]
        im = ax.imshow(grid.T, origin="lower", aspect="auto",
                       extent=(xs[0], xs[-1], ys[0], ys[-1]),
                       vmin=vmin, vmax=vmax)
        ax.set_title(var)
        fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    return fig
