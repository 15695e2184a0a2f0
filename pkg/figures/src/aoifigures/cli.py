"""Command-line entry point: regenerate all figures from a results CSV."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .catalog import load_shell_geometry
from .frame import ResultsFrame, SchemaError
from .plots import (
    plot_coverage_vs_aoi,
    plot_interval_sensitivity,
    plot_pr_topology,
    plot_shell_comparison,
    plot_swath_curves,
)

WHICH_CHOICES = ("all", "shells", "pr", "swath", "interval", "coverage")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures", description="Render figures from AoI results CSVs"
    )
    parser.add_argument("--results", required=True, help="results CSV from the simulator")
    parser.add_argument("--catalog", help="catalog TOML (required for the P/R figure)")
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--which", choices=WHICH_CHOICES, default="all")
    parser.add_argument("--swath-km", type=float, default=500.0,
                        help="swath radius for the per-shell bar chart")
    parser.add_argument("--shells", help="comma list for curve figures; default all")
    parser.add_argument("--log-scale", action="store_true",
                        help="log axis where the figure supports it")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    shells = [s.strip() for s in args.shells.split(",")] if args.shells else None

    try:
        frame = ResultsFrame.load(args.results)
        written: list[Path] = []
        if args.which in ("all", "shells"):
            written += plot_shell_comparison(
                frame, args.swath_km, out_dir, log_scale=args.log_scale
            )
        if args.which in ("all", "pr"):
            if not args.catalog:
                raise ValueError("--catalog is required for the P/R topology figure")
            written += plot_pr_topology(frame, load_shell_geometry(args.catalog), out_dir)
        if args.which in ("all", "swath"):
            written += plot_swath_curves(frame, shells, out_dir)
        if args.which in ("all", "interval"):
            written += plot_interval_sensitivity(frame, shells, out_dir)
        if args.which in ("all", "coverage"):
            written += plot_coverage_vs_aoi(frame, out_dir, log_y=args.log_scale)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
