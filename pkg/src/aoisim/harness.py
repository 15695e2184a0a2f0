"""Trial orchestration: config ingestion, the per-step loop, matrix runs, CSV.

A trial walks the discretized horizon: build the snapshot, reroute in-flight
packets, find the active sensing set, spawn at most one task, then advance
the event engine to the next boundary. The experiment matrix is the
Cartesian product of shells, stations, swath radii, and step sizes, with
results streamed to a CSV that downstream tooling consumes.
"""
from __future__ import annotations

import csv
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .constants import (
    DEFAULT_ISL_BANDWIDTH_BPS,
    DEFAULT_MTU_BYTES,
    DEFAULT_SGL_BANDWIDTH_BPS,
)
from .constellation import (
    ConfigError,
    GeodeticCoord,
    ShellConfig,
    ShellElements,
    SimClock,
    WalkerPattern,
)
from .coverage import RegionOfInterest, SwathModel, active_set, coverage_probability
from .metrics import AoITimeline, summarize
from .netsim import NetworkEngine
from .pipeline import ComputeParams, assign_workers, create_task, select_master, task_packets
from .topology import GroundStation, IslGrid, build_snapshot

CSV_SCHEMA = "aoi-results-v1"
CSV_COLUMNS = [
    "shell",
    "ground_station",
    "swath_km",
    "dt_s",
    "horizon_s",
    "avg_aoi_s",
    "peak_aoi_s",
    "coverage_prob",
    "tasks_created",
    "tasks_delivered",
    "tasks_superseded",
    "mean_latency_s",
]

_SHELL_KEYS = {
    "name",
    "planes",
    "sats_per_plane",
    "inclination_deg",
    "altitude_km",
    "min_elevation_deg",
    "pattern",
    "phasing",
}
_STATION_KEYS = {"name", "lat_deg", "lon_deg"}


@dataclass(frozen=True)
class ShellCatalog:
    """Validated map of shell name to configuration."""

    shells: dict[str, ShellConfig]

    def __getitem__(self, name: str) -> ShellConfig:
        try:
            return self.shells[name]
        except KeyError:
            known = ", ".join(sorted(self.shells))
            raise ConfigError(f"unknown shell '{name}'; catalog has: {known}") from None

    def __len__(self) -> int:
        return len(self.shells)

    def names(self) -> list[str]:
        return list(self.shells)


def _parse_toml(path: str | Path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"catalog file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def load_catalog(path: str | Path) -> ShellCatalog:
    """Load and validate the shell catalog from a TOML file.

    Every [[shell]] table must carry exactly the ShellConfig fields; unknown
    keys, duplicate names, and invariant violations are rejected with the
    offending shell named.
    """
    data = _parse_toml(path)
    entries = data.get("shell")
    if not entries:
        raise ConfigError(f"{path}: no [[shell]] entries found")
    shells: dict[str, ShellConfig] = {}
    for idx, entry in enumerate(entries):
        name = entry.get("name", f"<shell #{idx}>")
        unknown = set(entry) - _SHELL_KEYS
        if unknown:
            raise ConfigError(f"shell '{name}': unknown keys {sorted(unknown)}")
        missing = _SHELL_KEYS - set(entry)
        if missing:
            raise ConfigError(f"shell '{name}': missing keys {sorted(missing)}")
        if name in shells:
            raise ConfigError(f"duplicate shell name '{name}' in {path}")
        try:
            pattern = WalkerPattern(str(entry["pattern"]).lower())
        except ValueError:
            raise ConfigError(
                f"shell '{name}': pattern must be 'delta' or 'star', "
                f"got {entry['pattern']!r}"
            ) from None
        shells[name] = ShellConfig(
            name=name,
            planes=int(entry["planes"]),
            sats_per_plane=int(entry["sats_per_plane"]),
            inclination_deg=float(entry["inclination_deg"]),
            altitude_km=float(entry["altitude_km"]),
            min_elevation_deg=float(entry["min_elevation_deg"]),
            pattern=pattern,
            phasing=int(entry["phasing"]),
        )
    return ShellCatalog(shells)


def load_stations(path: str | Path) -> dict[str, GroundStation]:
    """Load [[station]] entries from the catalog file."""
    data = _parse_toml(path)
    entries = data.get("station")
    if not entries:
        raise ConfigError(f"{path}: no [[station]] entries found")
    stations: dict[str, GroundStation] = {}
    for entry in entries:
        name = entry.get("name", "<unnamed station>")
        unknown = set(entry) - _STATION_KEYS
        if unknown:
            raise ConfigError(f"station '{name}': unknown keys {sorted(unknown)}")
        if name in stations:
            raise ConfigError(f"duplicate station name '{name}' in {path}")
        stations[name] = GroundStation(
            name, GeodeticCoord(float(entry["lat_deg"]), float(entry["lon_deg"]))
        )
    return stations


def load_roi(path: str | Path) -> RegionOfInterest:
    """Load the [roi] table from the catalog file."""
    data = _parse_toml(path)
    roi = data.get("roi")
    if not roi:
        raise ConfigError(f"{path}: no [roi] table found")
    if "vertices" not in roi:
        raise ConfigError(f"{path}: [roi] table needs a 'vertices' list")
    return RegionOfInterest.from_latlon(roi.get("name", "roi"), roi["vertices"])


@dataclass(frozen=True)
class TrialSpec:
    """Everything needed to run one deterministic trial."""

    shell: ShellConfig
    station: GroundStation
    roi: RegionOfInterest
    swath_km: float
    dt_s: float
    horizon_s: float
    compute: ComputeParams = field(default_factory=ComputeParams)
    isl_bandwidth_bps: float = DEFAULT_ISL_BANDWIDTH_BPS
    sgl_bandwidth_bps: float = DEFAULT_SGL_BANDWIDTH_BPS
    mtu_bytes: int = DEFAULT_MTU_BYTES
    seed: int = 0
    stochastic: bool = False
    warmup_s: float = 0.0

    def __post_init__(self) -> None:
        if self.dt_s <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt_s}")
        if self.horizon_s < self.dt_s:
            raise ConfigError(
                f"horizon {self.horizon_s} s must cover at least one step {self.dt_s} s"
            )
        if self.swath_km <= 0:
            raise ConfigError(f"swath radius must be positive, got {self.swath_km}")

    def key(self) -> tuple[str, str, str, str, str]:
        """Row identity used for matrix resume."""
        return (
            self.shell.name,
            self.station.name,
            f"{self.swath_km:.3f}",
            f"{self.dt_s:.3f}",
            f"{self.horizon_s:.3f}",
        )


@dataclass(frozen=True)
class TrialResult:
    shell_name: str
    station_name: str
    swath_km: float
    dt_s: float
    horizon_s: float
    seed: int
    stochastic: bool
    average_aoi_s: float
    peak_aoi_s: float
    coverage_probability: float
    tasks_created: int
    tasks_delivered: int
    tasks_superseded: int
    mean_delivery_latency_s: float
    wall_clock_s: float
    error: str | None = None

    def row(self) -> list[str]:
        return [
            self.shell_name,
            self.station_name,
            f"{self.swath_km:.3f}",
            f"{self.dt_s:.3f}",
            f"{self.horizon_s:.3f}",
            f"{self.average_aoi_s:.3f}",
            f"{self.peak_aoi_s:.3f}",
            f"{self.coverage_probability:.3f}",
            str(self.tasks_created),
            str(self.tasks_delivered),
            str(self.tasks_superseded),
            f"{self.mean_delivery_latency_s:.3f}",
        ]


@dataclass
class TrialRun:
    """Raw outcome of one trial, before AoI summarization."""

    clock: SimClock
    records: list
    tasks: dict
    coverage_probability: float


def simulate(spec: TrialSpec, *, trace: TextIO | None = None) -> TrialRun:
    """Drive the per-step loop and return the raw delivery stream.

    Each step: build the snapshot, reroute in-flight packets, find the
    active sensing set, spawn at most one task, advance the engine to the
    next boundary. Task states are finalized through the AoI acceptance
    filter (Complete when a delivery resets the sawtooth, Superseded when
    it arrives obsolete).
    """
    shell = spec.shell
    elements = ShellElements.from_config(shell)
    grid = IslGrid.from_shell(shell)
    clock = SimClock(spec.horizon_s, spec.dt_s)
    swath = SwathModel(spec.swath_km)
    rng = np.random.default_rng(spec.seed) if spec.stochastic else None
    engine = NetworkEngine(
        ground_node=shell.total_sats, route_bits=spec.mtu_bytes * 8, trace=trace
    )

    tasks = {}
    active_sets = []
    times = clock.timestamps()
    last = len(times) - 1
    for i, t in enumerate(times):
        t = float(t)
        snap = build_snapshot(
            shell,
            elements,
            spec.station,
            t,
            grid=grid,
            isl_bandwidth_bps=spec.isl_bandwidth_bps,
            sgl_bandwidth_bps=spec.sgl_bandwidth_bps,
        )
        engine.set_snapshot(snap)
        act = active_set(snap.positions[:-1], spec.roi, swath, t, shell.sats_per_plane)
        active_sets.append(act)
        if act.members:
            master = select_master(act, spec.roi, snap.positions, shell.sats_per_plane)
            workers = assign_workers(master, shell)
            task = create_task(
                len(tasks), t, master, workers, spec.compute, spec.mtu_bytes, rng
            )
            tasks[task.task_id] = task
            engine.submit_task(task, task_packets(task, spec.mtu_bytes, shell.sats_per_plane))
        if i < last:
            engine.advance_to(float(times[i + 1]), inclusive=False)
        else:
            engine.advance_to(t, inclusive=True)

    records = engine.delivery_records
    timeline = AoITimeline()
    for rec in records:
        if timeline.accept_delivery(rec):
            tasks[rec.task_id].mark_complete()
        else:
            tasks[rec.task_id].mark_superseded()
    return TrialRun(
        clock=clock,
        records=records,
        tasks=tasks,
        coverage_probability=coverage_probability(active_sets),
    )


def run_trial(spec: TrialSpec, *, trace: TextIO | None = None) -> TrialResult:
    """Execute one trial end to end; deterministic for a fixed spec and seed."""
    started = time.perf_counter()
    run = simulate(spec, trace=trace)
    records = run.records
    summary = summarize(run.clock, records, run.coverage_probability, warmup_s=spec.warmup_s)

    if records:
        mean_latency = sum(r.completion_time_s - r.generation_time_s for r in records) / len(
            records
        )
    else:
        mean_latency = math.nan

    return TrialResult(
        shell_name=spec.shell.name,
        station_name=spec.station.name,
        swath_km=spec.swath_km,
        dt_s=spec.dt_s,
        horizon_s=spec.horizon_s,
        seed=spec.seed,
        stochastic=spec.stochastic,
        average_aoi_s=summary.average_aoi_s,
        peak_aoi_s=summary.peak_aoi_s,
        coverage_probability=summary.coverage_probability,
        tasks_created=len(run.tasks),
        tasks_delivered=summary.delivered_tasks,
        tasks_superseded=summary.superseded_tasks,
        mean_delivery_latency_s=mean_latency,
        wall_clock_s=time.perf_counter() - started,
    )


def _failed_result(spec: TrialSpec, error: str, wall: float) -> TrialResult:
    return TrialResult(
        shell_name=spec.shell.name,
        station_name=spec.station.name,
        swath_km=spec.swath_km,
        dt_s=spec.dt_s,
        horizon_s=spec.horizon_s,
        seed=spec.seed,
        stochastic=spec.stochastic,
        average_aoi_s=math.nan,
        peak_aoi_s=math.nan,
        coverage_probability=math.nan,
        tasks_created=0,
        tasks_delivered=0,
        tasks_superseded=0,
        mean_delivery_latency_s=math.nan,
        wall_clock_s=wall,
        error=error,
    )


def _run_trial_guarded(spec: TrialSpec) -> TrialResult:
    started = time.perf_counter()
    try:
        return run_trial(spec)
    except Exception as exc:  # noqa: BLE001 - matrix rows must not abort the run
        return _failed_result(spec, f"{type(exc).__name__}: {exc}", time.perf_counter() - started)


def _existing_keys(path: Path) -> set[tuple[str, ...]]:
    keys: set[tuple[str, ...]] = set()
    if not path.exists():
        return keys
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            row = next(csv.reader([line]))
            if row and row[0] != "shell":
                keys.add(tuple(row[:5]))
    return keys


def _open_results(path: Path, append: bool) -> TextIO:
    fh = open(path, "a" if append else "w", newline="")
    if not append:
        fh.write(f"# schema={CSV_SCHEMA}\n")
        fh.write(",".join(CSV_COLUMNS) + "\n")
        fh.flush()
    return fh


def run_matrix(
    specs: Sequence[TrialSpec],
    *,
    out_path: str | Path | None = None,
    jobs: int = 1,
    log: TextIO | None = None,
) -> list[TrialResult]:
    """Run a batch of trials, streaming rows to out_path as they complete.

    A pre-existing results file is treated as a partial run: rows whose
    (shell, station, swath, dt, horizon) identity is already present are
    skipped, so an interrupted matrix can resume without duplicates.
    Individual trial failures are recorded as NaN rows and do not abort
    the batch.
    """
    log = log if log is not None else sys.stderr
    out = None
    done: set[tuple[str, ...]] = set()
    if out_path is not None:
        out_path = Path(out_path)
        done = _existing_keys(out_path)
        out = _open_results(out_path, append=bool(done))

    todo = [s for s in specs if s.key() not in done]
    skipped = len(specs) - len(todo)
    if skipped:
        log.write(f"resuming: {skipped} rows already present\n")

    results: list[TrialResult] = []

    def _record(res: TrialResult) -> None:
        results.append(res)
        if res.error:
            log.write(f"trial {res.shell_name}/{res.station_name} failed: {res.error}\n")
        if out is not None:
            out.write(",".join(res.row()) + "\n")
            out.flush()

    try:
        if jobs <= 1:
            for spec in todo:
                _record(_run_trial_guarded(spec))
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for res in pool.map(_run_trial_guarded, todo):
                    _record(res)
    finally:
        if out is not None:
            out.close()
    return results


def matrix_specs(
    catalog: ShellCatalog,
    stations: Iterable[GroundStation],
    roi: RegionOfInterest,
    *,
    shells: Iterable[str] | None = None,
    swaths_km: Iterable[float] = (100.0, 200.0, 300.0, 400.0, 500.0),
    steps_s: Iterable[float] = (10.0, 20.0, 30.0),
    horizon_s: float = 86400.0,
    compute: ComputeParams | None = None,
    seed: int = 0,
    stochastic: bool = False,
) -> list[TrialSpec]:
    """Cartesian product of the experiment axes, in deterministic order."""
    compute = compute if compute is not None else ComputeParams()
    names = list(shells) if shells is not None else catalog.names()
    specs = []
    for name in names:
        shell = catalog[name]
        for station in stations:
            for swath in swaths_km:
                for dt in steps_s:
                    specs.append(
                        TrialSpec(
                            shell=shell,
                            station=station,
                            roi=roi,
                            swath_km=float(swath),
                            dt_s=float(dt),
                            horizon_s=float(horizon_s),
                            compute=compute,
                            seed=seed,
                            stochastic=stochastic,
                        )
                    )
    return specs


def write_results(results: Sequence[TrialResult], path: str | Path) -> None:
    """Write a complete results CSV (schema comment, header, one row per trial)."""
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(f"# schema={CSV_SCHEMA}\n")
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for res in results:
                fh.write(",".join(res.row()) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def rerun_row(spec: TrialSpec) -> TrialResult:
    """Re-execute a single row from its spec echo (row determinism check)."""
    return run_trial(replace(spec))
