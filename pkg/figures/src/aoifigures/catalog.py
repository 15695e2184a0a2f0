"""Minimal catalog reader: only the (planes, sats_per_plane) geometry per shell."""
from __future__ import annotations

from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib


def load_shell_geometry(path: str | Path) -> dict[str, tuple[int, int]]:
    """Map shell name -> (P, R) from a catalog TOML file."""
    path = Path(path)
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    shells = data.get("shell")
    if not shells:
        raise ValueError(f"{path}: no [[shell]] entries found")
    out: dict[str, tuple[int, int]] = {}
    for entry in shells:
        out[entry["name"]] = (int(entry["planes"]), int(entry["sats_per_plane"]))
    return out
