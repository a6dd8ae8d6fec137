"""Command line entry point.

Exit codes: 0 when every monitor passes, 2 on a monitor violation, 1 on a
solver or configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .elliptic import NonConvergence
from .experiments import (
    equivalence_check,
    galerkin_compare,
    load_config,
    run,
    sweep_gamma,
    sweep_sigma,
)
from .galerkin import NoAdmissibleRoot
from .stepper import DtUnderflow


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rdch",
        description="Simulate the relaxed degenerate Cahn-Hilliard / generalized "
                    "Keller-Segel system and its limit studies.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("run", "integrate one configuration and write diagnostics"),
        ("sweep-sigma", "vanishing-relaxation study against the sigma=0 reference"),
        ("sweep-gamma", "stiff-pressure study of the complementarity defect"),
        ("equivalence", "compare the two formulations under refinement"),
        ("galerkin-compare", "cross-validate the grid solver against the spectral one"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="INI config file (defaults if omitted)")
        p.add_argument("--out", default=None, help="output directory for artifacts")
        p.add_argument("--override", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override a config entry (repeatable)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.override)
        if args.command == "run":
            result = run(config, args.out)
            for v in result.bounds.violations:
                print(f"monitor violation: {v}", file=sys.stderr)
            return result.exit_code
        if args.command == "sweep-sigma":
            report = sweep_sigma(config, out_dir=args.out)
        elif args.command == "sweep-gamma":
            report = sweep_gamma(config, out_dir=args.out)
        elif args.command == "equivalence":
            report = equivalence_check(config, args.out)
        else:
            report = galerkin_compare(config, args.out)
        print(report.to_json())
        if not report.ok:
            for v in report.flags:
                print(f"monitor violation: {v}", file=sys.stderr)
            return 2
        return 0
    except (FileNotFoundError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (NonConvergence, DtUnderflow, NoAdmissibleRoot) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
