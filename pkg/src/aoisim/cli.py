"""Command-line interface: single trials, experiment matrices, snapshot export."""
from __future__ import annotations

import argparse
import sys

from .constellation import ConfigError, ShellElements
from .harness import (
    TrialSpec,
    load_catalog,
    load_roi,
    load_stations,
    matrix_specs,
    run_matrix,
    run_trial,
    write_results,
)
from .pipeline import ComputeParams
from .topology import IslGrid, build_snapshot, export_edge_list


def _add_catalog_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--catalog", required=True, help="catalog TOML file")


def _csv_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _csv_names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoisim",
        description="LEO constellation edge-computing AoI simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a single trial")
    _add_catalog_arg(sim)
    sim.add_argument("--shell", required=True)
    sim.add_argument("--station", required=True)
    sim.add_argument("--swath-km", type=float, required=True)
    sim.add_argument("--dt-s", type=float, required=True)
    sim.add_argument("--horizon-s", type=float, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--stochastic", action="store_true")
    sim.add_argument("--out", help="write the result row as CSV")
    sim.add_argument("--trace", help="write the event trace to this file")

    mat = sub.add_parser("matrix", help="run the experiment matrix")
    _add_catalog_arg(mat)
    mat.add_argument("--shells", type=_csv_names, help="comma list; default: all")
    mat.add_argument("--stations", type=_csv_names, help="comma list; default: all")
    mat.add_argument("--swaths", type=_csv_floats, default=[100, 200, 300, 400, 500])
    mat.add_argument("--steps", type=_csv_floats, default=[10, 20, 30])
    mat.add_argument("--horizon-s", type=float, default=86400.0)
    mat.add_argument("--seed", type=int, default=0)
    mat.add_argument("--stochastic", action="store_true")
    mat.add_argument("--out", default="results.csv")
    mat.add_argument("--jobs", type=int, default=1)

    snap = sub.add_parser("snapshot", help="export one topology snapshot")
    _add_catalog_arg(snap)
    snap.add_argument("--shell", required=True)
    snap.add_argument("--station", help="default: first station in the catalog")
    snap.add_argument("--t-s", type=float, required=True)
    snap.add_argument("--out", required=True)

    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    catalog = load_catalog(args.catalog)
    stations = load_stations(args.catalog)
    roi = load_roi(args.catalog)
    if args.station not in stations:
        raise ConfigError(
            f"unknown station '{args.station}'; catalog has: {', '.join(stations)}"
        )
    spec = TrialSpec(
        shell=catalog[args.shell],
        station=stations[args.station],
        roi=roi,
        swath_km=args.swath_km,
        dt_s=args.dt_s,
        horizon_s=args.horizon_s,
        compute=ComputeParams(),
        seed=args.seed,
        stochastic=args.stochastic,
    )
    trace_fh = open(args.trace, "w") if args.trace else None
    try:
        result = run_trial(spec, trace=trace_fh)
    finally:
        if trace_fh:
            trace_fh.close()
    print(
        f"{result.shell_name} @ {result.station_name}: "
        f"avg AoI {result.average_aoi_s:.3f} s, peak {result.peak_aoi_s:.3f} s, "
        f"coverage {result.coverage_probability:.3f}, "
        f"tasks {result.tasks_created}/{result.tasks_delivered} created/delivered "
        f"({result.wall_clock_s:.1f} s wall)"
    )
    if args.out:
        write_results([result], args.out)
    return 0


def _cmd_matrix(args: argparse.Namespace) -> int:
    catalog = load_catalog(args.catalog)
    stations = load_stations(args.catalog)
    roi = load_roi(args.catalog)
    chosen = args.stations or list(stations)
    try:
        station_objs = [stations[name] for name in chosen]
    except KeyError as exc:
        raise ConfigError(f"unknown station {exc}") from None
    specs = matrix_specs(
        catalog,
        station_objs,
        roi,
        shells=args.shells,
        swaths_km=args.swaths,
        steps_s=args.steps,
        horizon_s=args.horizon_s,
        seed=args.seed,
        stochastic=args.stochastic,
    )
    results = run_matrix(specs, out_path=args.out, jobs=args.jobs)
    failures = sum(1 for r in results if r.error)
    print(f"{len(results)} trials run, {failures} failures, results in {args.out}")
    return 1 if failures else 0


def _cmd_snapshot(args: argparse.Namespace) -> int:
    catalog = load_catalog(args.catalog)
    stations = load_stations(args.catalog)
    shell = catalog[args.shell]
    station_name = args.station or next(iter(stations))
    if station_name not in stations:
        raise ConfigError(f"unknown station '{station_name}'")
    snap = build_snapshot(
        shell,
        ShellElements.from_config(shell),
        stations[station_name],
        args.t_s,
        grid=IslGrid.from_shell(shell),
    )
    with open(args.out, "w") as fh:
        count = export_edge_list(snap, fh)
    print(f"wrote {count} edges to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "matrix": _cmd_matrix,
        "snapshot": _cmd_snapshot,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
