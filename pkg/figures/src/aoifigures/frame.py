"""Validated tabular view of a results CSV.

The results file must open with a schema comment line; a version mismatch is
a hard error so figures can never silently bind to reordered or renamed
columns. Rows are kept in file order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

SCHEMA = "aoi-results-v1"

REQUIRED_COLUMNS = [
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

_NUMERIC = REQUIRED_COLUMNS[2:]


class SchemaError(ValueError):
    """The results file does not match the expected schema."""


@dataclass(frozen=True)
class ResultRow:
    shell: str
    ground_station: str
    swath_km: float
    dt_s: float
    horizon_s: float
    avg_aoi_s: float
    peak_aoi_s: float
    coverage_prob: float
    tasks_created: float
    tasks_delivered: float
    tasks_superseded: float
    mean_latency_s: float

    @property
    def family(self) -> str:
        """Constellation family: the shell name up to the first underscore."""
        return self.shell.split("_", 1)[0]


@dataclass(frozen=True)
class ResultsFrame:
    path: Path
    rows: tuple[ResultRow, ...]

    @classmethod
    def load(cls, path: str | Path) -> "ResultsFrame":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise SchemaError(f"cannot read results file {path}: {exc}") from exc
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise SchemaError(
                f"{path}: missing schema comment line (expected '# schema={SCHEMA}')"
            )
        declared = lines[0].lstrip("#").strip()
        if declared != f"schema={SCHEMA}":
            raise SchemaError(
                f"{path}: schema mismatch: found '{declared}', expected 'schema={SCHEMA}'"
            )
        reader = csv.DictReader(lines[1:])
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")

        rows: list[ResultRow] = []
        for lineno, raw in enumerate(reader, start=3):
            values = {}
            for col in _NUMERIC:
                try:
                    values[col] = float(raw[col])
                except (TypeError, ValueError):
                    raise SchemaError(
                        f"{path}:{lineno}: column '{col}' is not numeric: {raw[col]!r}"
                    ) from None
            cov = values["coverage_prob"]
            if math.isnan(cov) or not 0.0 <= cov <= 1.0:
                raise SchemaError(
                    f"{path}:{lineno}: coverage_prob {cov} outside [0, 1]"
                )
            rows.append(
                ResultRow(shell=raw["shell"], ground_station=raw["ground_station"], **values)
            )
        return cls(path=path, rows=tuple(rows))

    def __len__(self) -> int:
        return len(self.rows)

    def shells_in_order(self) -> list[str]:
        """Shell names in first-appearance order (Table-style ordering)."""
        seen: dict[str, None] = {}
        for row in self.rows:
            seen.setdefault(row.shell, None)
        return list(seen)

    def swath_values(self) -> list[float]:
        return sorted({row.swath_km for row in self.rows})

    def dt_values(self) -> list[float]:
        return sorted({row.dt_s for row in self.rows})


def mean_avg_aoi(rows: list[ResultRow]) -> float:
    return sum(r.avg_aoi_s for r in rows) / len(rows)
