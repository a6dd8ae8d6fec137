"""Figure rendering for rdch simulation artifacts."""

from .fields import plot_fields
from .io import (
    SchemaError,
    find_snapshots,
    load_diagnostics,
    load_meta,
    load_snapshot,
    load_sweep_report,
)
from .jobs import PlotJob
from .sweep import fit_loglog_slope, plot_sweep
from .timeseries import plot_timeseries

__version__ = "0.1.0"
