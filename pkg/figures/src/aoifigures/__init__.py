"""Publication-style figures from AoI simulation result CSVs."""

from .frame import ResultsFrame, SchemaError
from .plots import (
    plot_coverage_vs_aoi,
    plot_interval_sensitivity,
    plot_pr_topology,
    plot_shell_comparison,
    plot_swath_curves,
)

__all__ = [
    "ResultsFrame",
    "SchemaError",
    "plot_coverage_vs_aoi",
    "plot_interval_sensitivity",
    "plot_pr_topology",
    "plot_shell_comparison",
    "plot_swath_curves",
]
