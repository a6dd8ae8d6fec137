"""Sweep convergence chart: metrics vs the swept parameter on log-log axes."""

from __future__ import annotations

import matplotlib.pyplot as plt
import numpy as np

from .io import load_sweep_report
from .jobs import PlotJob


def fit_loglog_slope(x: np.ndarray, y: np.ndarray) -> float | None:
    """Least-squares slope in log space; None when a fit is not meaningful."""
    mask = (x > 0) & (y > 0)
    if int(np.count_nonzero(mask)) < 2:
        return None
    lx, ly = np.log(x[mask]), np.log(y[mask])
    slope = np.polyfit(lx, ly, 1)[0]
    return float(slope)


def plot_sweep(job: PlotJob):
    """Render every positive metric series of a sweep report with slope fits."""
    report = load_sweep_report(job.input_dir)
    values = np.asarray(report["values"], dtype=float)
    fig, ax = plt.subplots(figsize=job.figsize)
    plotted = 0
    for name, series in sorted(report["metrics"].items()):
        y = np.asarray(series, dtype=float)
        if y.shape != values.shape or np.any(y <= 0):
            continue
        slope = fit_loglog_slope(values, y)
        label = name if slope is None else f"{name} (slope {slope:.2f})"
        if len(values) == 1:
            ax.scatter(values, y, label=label)
        else:
            ax.plot(values, y, "o-", label=label)
        plotted += 1
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(report["parameter"])
    ax.grid(True, which="both", alpha=0.3)
    if plotted:
        ax.legend(loc="best")
    fig.tight_layout()
    job.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(job.output, dpi=job.dpi)
    return fig
