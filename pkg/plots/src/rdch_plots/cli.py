"""Command line entry point: plots <kind> --in <dir> --out <path>."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

from .fields import plot_fields
from .io import SchemaError
from .jobs import KINDS, PlotJob
from .sweep import plot_sweep
from .timeseries import plot_timeseries


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render rdch simulation artifacts into figures.")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="input_dir", required=True,
                        help="run or report directory")
    parser.add_argument("--out", dest="output", required=True,
                        help="output image path")
    parser.add_argument("--dpi", type=int, default=120)
    args = parser.parse_args(argv)
    job = PlotJob(input_dir=args.input_dir, kind=args.kind,
                  output=args.output, dpi=args.dpi)
    try:
        if job.kind == "timeseries":
            plot_timeseries(job)
        elif job.kind == "fields":
            plot_fields(job)
        else:
            plot_sweep(job)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
