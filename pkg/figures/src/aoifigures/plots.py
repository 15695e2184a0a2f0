"""The five figure builders: each writes an image plus its data series.

Every plot is a pure function of its inputs: the underlying series is
exported next to the image (same basename, .csv) so tests and reviewers can
diff data instead of pixels. Aggregation is always the mean of avg_aoi_s
over the rows sharing the group key.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .frame import ResultsFrame, ResultRow, mean_avg_aoi


def _write_series(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _group_mean(
    rows: list[ResultRow], key, order: list | None = None
) -> dict:
    groups: dict = {}
    for row in rows:
        groups.setdefault(key(row), []).append(row)
    keys = order if order is not None else list(groups)
    return {k: mean_avg_aoi(groups[k]) for k in keys if k in groups}


def plot_shell_comparison(
    frame: ResultsFrame, swath_km: float, out_dir: str | Path, *, log_scale: bool = False
) -> tuple[Path, Path]:
    """Bar chart of average AoI per shell at one swath radius.

    Bars follow first-appearance order (catalog order for matrix output);
    values are means over stations and step sizes. A missing swath is an
    error listing what the frame actually contains.
    """
    out_dir = Path(out_dir)
    rows = [r for r in frame.rows if r.swath_km == swath_km]
    if not rows:
        available = ", ".join(str(v) for v in frame.swath_values()) or "none"
        raise ValueError(
            f"no rows at swath {swath_km} km; available swath values: {available}"
        )
    series = _group_mean(rows, key=lambda r: r.shell, order=frame.shells_in_order())

    img = out_dir / "shells.png"
    data = out_dir / "shells.csv"
    fig, ax = plt.subplots(figsize=(9, 4.5))
    names = list(series)
    ax.bar(range(len(names)), [series[n] for n in names], color="#1f3a6e")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=45, ha="right")
    ax.set_ylabel("average AoI (s)")
    ax.set_title(f"Average AoI per shell at {swath_km:g} km swath")
    if log_scale:
        ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(img, dpi=150)
    plt.close(fig)
    _write_series(data, ["shell", "avg_aoi_s"], [[n, series[n]] for n in names])
    return img, data


def plot_pr_topology(
    frame: ResultsFrame, geometry: dict[str, tuple[int, int]], out_dir: str | Path
) -> tuple[Path, Path]:
    """Scatter of shells in the (P, R) plane, darker markers for higher AoI."""
    out_dir = Path(out_dir)
    if not frame.rows:
        raise ValueError("cannot plot an empty results frame")
    series = _group_mean(frame.rows, key=lambda r: r.shell, order=frame.shells_in_order())
    missing = [s for s in series if s not in geometry]
    if missing:
        raise ValueError(f"shells missing from catalog: {missing}")

    points = []
    seen: dict[tuple[int, int], int] = {}
    for shell, aoi in series.items():
        p, r = geometry[shell]
        bump = seen.get((p, r), 0)
        seen[(p, r)] = bump + 1
        # Deterministic jitter separates shells that share a (P, R) cell.
        points.append((shell, p, r, p + 0.15 * bump, r + 0.15 * bump, aoi))

    img = out_dir / "pr_topology.png"
    data = out_dir / "pr_topology.csv"
    fig, ax = plt.subplots(figsize=(6.5, 5))
    xs = [pt[3] for pt in points]
    ys = [pt[4] for pt in points]
    cs = [pt[5] for pt in points]
    sc = ax.scatter(xs, ys, c=cs, cmap="viridis_r", s=140, edgecolors="black")
    for shell, _, _, x, y, _ in points:
        ax.annotate(shell, (x, y), textcoords="offset points", xytext=(6, 4), fontsize=7)
    fig.colorbar(sc, ax=ax, label="average AoI (s)")
    ax.set_xlabel("orbital planes P")
    ax.set_ylabel("satellites per plane R")
    ax.set_title("Average AoI over the (P, R) plane")
    fig.tight_layout()
    fig.savefig(img, dpi=150)
    plt.close(fig)
    _write_series(
        data,
        ["shell", "planes", "sats_per_plane", "avg_aoi_s"],
        [[shell, p, r, aoi] for shell, p, r, _, _, aoi in points],
    )
    return img, data


def plot_swath_curves(
    frame: ResultsFrame, shells: list[str] | None, out_dir: str | Path
) -> tuple[Path, Path]:
    """One line per shell across swath radii (sorted shells for stability)."""
    out_dir = Path(out_dir)
    swaths = frame.swath_values()
    if len(swaths) < 2:
        raise ValueError(
            f"need rows at >= 2 swath radii to draw curves, found {len(swaths)}"
        )
    names = sorted(shells) if shells else sorted(frame.shells_in_order())

    img = out_dir / "swath.png"
    data = out_dir / "swath.csv"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    series_rows = []
    for name in names:
        rows = [r for r in frame.rows if r.shell == name]
        if not rows:
            raise ValueError(f"shell '{name}' has no rows in the results frame")
        by_swath = _group_mean(rows, key=lambda r: r.swath_km, order=swaths)
        xs = [s for s in swaths if s in by_swath]
        ys = [by_swath[s] for s in xs]
        ax.plot(xs, ys, marker="o", label=name)
        series_rows.extend([[name, x, y] for x, y in zip(xs, ys)])
    ax.set_xlabel("swath radius (km)")
    ax.set_ylabel("average AoI (s)")
    ax.set_title("Average AoI vs swath radius")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(img, dpi=150)
    plt.close(fig)
    _write_series(data, ["shell", "swath_km", "avg_aoi_s"], series_rows)
    return img, data


def plot_interval_sensitivity(
    frame: ResultsFrame, shells: list[str] | None, out_dir: str | Path
) -> tuple[Path, Path]:
    """Average AoI against the simulation step size, one line per shell.

    Output is invariant to input row order: shells and steps are sorted.
    """
    out_dir = Path(out_dir)
    if not frame.rows:
        raise ValueError("cannot plot an empty results frame")
    dts = frame.dt_values()
    names = sorted(shells) if shells else sorted(frame.shells_in_order())

    img = out_dir / "interval.png"
    data = out_dir / "interval.csv"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    series_rows = []
    for name in names:
        rows = [r for r in frame.rows if r.shell == name]
        if not rows:
            raise ValueError(f"shell '{name}' has no rows in the results frame")
        by_dt = _group_mean(rows, key=lambda r: r.dt_s, order=dts)
        xs = [d for d in dts if d in by_dt]
        ys = [by_dt[d] for d in xs]
        ax.plot(xs, ys, marker="s", label=name)
        series_rows.extend([[name, x, y] for x, y in zip(xs, ys)])
    ax.set_xlabel("simulation step (s)")
    ax.set_ylabel("average AoI (s)")
    ax.set_title("Average AoI vs task interval")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(img, dpi=150)
    plt.close(fig)
    _write_series(data, ["shell", "dt_s", "avg_aoi_s"], series_rows)
    return img, data


def plot_coverage_vs_aoi(
    frame: ResultsFrame, out_dir: str | Path, *, log_y: bool = False
) -> tuple[Path, Path]:
    """Scatter of every trial: coverage probability against average AoI."""
    out_dir = Path(out_dir)
    if not frame.rows:
        raise ValueError("cannot plot an empty results frame")
    families = sorted({r.family for r in frame.rows})
    cmap = plt.get_cmap("tab10")

    img = out_dir / "coverage.png"
    data = out_dir / "coverage.csv"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for k, family in enumerate(families):
        rows = [r for r in frame.rows if r.family == family]
        ax.scatter(
            [r.coverage_prob for r in rows],
            [r.avg_aoi_s for r in rows],
            s=22,
            color=cmap(k % 10),
            label=family,
            alpha=0.8,
        )
    ax.set_xlabel("coverage probability")
    ax.set_ylabel("average AoI (s)")
    ax.set_title("Average AoI vs coverage probability")
    if log_y:
        ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(img, dpi=150)
    plt.close(fig)
    _write_series(
        data,
        ["shell", "family", "coverage_prob", "avg_aoi_s"],
        [[r.shell, r.family, r.coverage_prob, r.avg_aoi_s] for r in frame.rows],
    )
    return img, data
