"""Diagnostic time-series figure: mass, energy, entropy, complementarity."""

from __future__ import annotations

import matplotlib.pyplot as plt

from .io import load_diagnostics
from .jobs import PlotJob

PANELS = (
    ("mass", "total mass"),
    ("energy", "energy"),
    ("entropy", "entropy"),
    ("complementarity", "complementarity defect"),
)


def plot_timeseries(job: PlotJob):
    """Render the four diagnostic panels and save the figure.

    Returns the figure; each panel's line carries the raw column values, so
    the plotted series can be read back and compared to the CSV exactly.
    """
    data = load_diagnostics(job.input_dir / "diagnostics.csv")
    fig, axes = plt.subplots(2, 2, figsize=job.figsize, sharex=True)
    for ax, (column, label) in zip(axes.ravel(), PANELS):
        ax.plot(data["t"], data[column], lw=1.2)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    for ax in axes[-1]:
        ax.set_xlabel("t")
    fig.suptitle(str(job.input_dir.name))
    fig.tight_layout()
    job.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(job.output, dpi=job.dpi)
    return fig
