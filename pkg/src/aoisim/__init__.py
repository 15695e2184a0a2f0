"""Discrete-event simulator of LEO constellation edge-computing pipelines.

Models Walker shells, Grid+ inter-satellite topology, swath-gated sensing,
a measured compute-delay pipeline, packet-level routing to a ground station,
and Age of Information accounting over a discretized mission horizon.
"""

from .constants import EARTH_RADIUS_KM, SPEED_OF_LIGHT_KM_S
from .constellation import (
    GeodeticCoord,
    OrbitalElements,
    SatelliteId,
    ShellConfig,
    SimClock,
    WalkerPattern,
    build_walker,
    propagate,
)
from .harness import TrialSpec, load_catalog, run_matrix, run_trial, write_results

__all__ = [
    "EARTH_RADIUS_KM",
    "SPEED_OF_LIGHT_KM_S",
    "GeodeticCoord",
    "OrbitalElements",
    "SatelliteId",
    "ShellConfig",
    "SimClock",
    "WalkerPattern",
    "build_walker",
    "propagate",
    "TrialSpec",
    "load_catalog",
    "run_matrix",
    "run_trial",
    "write_results",
]
