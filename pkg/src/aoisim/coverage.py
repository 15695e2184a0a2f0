"""Swath-gated sensing: which satellites can capture the region of interest.

A satellite is an active sensing node only when every vertex of the RoI
polygon falls inside its circular swath, measured as true great-circle
distance from the sub-satellite point (the defining property of the
azimuthal equidistant projection).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import EARTH_RADIUS_KM
from .constellation import ConfigError, GeodeticCoord, SatelliteId, subsatellite_point


def _unit_vector(coord: GeodeticCoord) -> np.ndarray:
    lat = math.radians(coord.lat_deg)
    lon = math.radians(coord.lon_deg)
    return np.array(
        [math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat)]
    )


@dataclass(frozen=True)
class RegionOfInterest:
    """Monitored ground polygon with a precomputed spherical centroid."""

    name: str
    vertices: tuple[GeodeticCoord, ...]
    centroid: GeodeticCoord = field(init=False)

    def __post_init__(self) -> None:
        if not self.vertices:
            raise ConfigError(f"RoI '{self.name}' must have at least one vertex")
        mean = np.mean([_unit_vector(v) for v in self.vertices], axis=0)
        norm = np.linalg.norm(mean)
        if norm == 0.0:
            raise ConfigError(f"RoI '{self.name}' vertices have no defined centroid")
        object.__setattr__(self, "centroid", subsatellite_point(mean / norm))

    @classmethod
    def from_latlon(cls, name: str, latlon: list) -> "RegionOfInterest":
        return cls(name, tuple(GeodeticCoord(float(a), float(b)) for a, b in latlon))

    def vertex_units(self) -> np.ndarray:
        """Unit vectors of all vertices, shape (V, 3)."""
        return np.array([_unit_vector(v) for v in self.vertices])


@dataclass(frozen=True)
class SwathModel:
    """Circular sensor footprint of fixed great-circle radius."""

    radius_km: float

    def __post_init__(self) -> None:
        if self.radius_km <= 0:
            raise ConfigError(f"swath radius must be positive, got {self.radius_km}")


@dataclass(frozen=True)
class ActiveSet:
    """Satellites able to capture the full RoI at one timestamp."""

    time_s: float
    members: frozenset[SatelliteId]

    def __bool__(self) -> bool:
        return bool(self.members)


def azimuthal_equidistant_distance(center: GeodeticCoord, point: GeodeticCoord) -> float:
    """Great-circle distance in km between two geodetic points.

    The central angle uses atan2 of cross/dot of the unit vectors, which
    stays accurate near both coincident and antipodal configurations.
    """
    a = _unit_vector(center)
    b = _unit_vector(point)
    angle = math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))
    return EARTH_RADIUS_KM * angle


def is_active(sat_pos, roi: RegionOfInterest, swath: SwathModel) -> bool:
    """True iff every RoI vertex lies within the swath circle of sat_pos."""
    ssp = subsatellite_point(sat_pos)
    return all(
        azimuthal_equidistant_distance(ssp, v) <= swath.radius_km for v in roi.vertices
    )


def _max_vertex_distances(positions: np.ndarray, vertex_units: np.ndarray) -> np.ndarray:
    """Per-satellite maximum great-circle distance to any RoI vertex, km."""
    units = positions / np.linalg.norm(positions, axis=1, keepdims=True)
    cos_a = units @ vertex_units.T  # (N, V)
    cross = np.cross(units[:, None, :], vertex_units[None, :, :])
    sin_a = np.linalg.norm(cross, axis=2)
    angles = np.arctan2(sin_a, cos_a)
    return EARTH_RADIUS_KM * angles.max(axis=1)


def active_set(
    positions: np.ndarray,
    roi: RegionOfInterest,
    swath: SwathModel,
    time_s: float,
    sats_per_plane: int,
) -> ActiveSet:
    """All satellites whose swath fully contains the RoI at this step."""
    far = _max_vertex_distances(positions, roi.vertex_units())
    members = frozenset(
        SatelliteId.from_flat(int(i), sats_per_plane)
        for i in np.nonzero(far <= swath.radius_km)[0]
    )
    return ActiveSet(time_s, members)


def coverage_probability(active_sets: list[ActiveSet]) -> float:
    """Fraction of steps with at least one active sensing satellite."""
    if not active_sets:
        raise ValueError("coverage probability of an empty step list is undefined")
    return sum(1 for a in active_sets if a.members) / len(active_sets)
