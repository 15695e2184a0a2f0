"""Walker shell generation and circular-orbit propagation to ECEF.

Shells are generated from a ``ShellConfig`` tuple and propagated with
two-body circular Keplerian dynamics on a spherical Earth. Positions are
expressed in the Earth-Centered Earth-Fixed frame; the epoch convention
aligns Greenwich with the inertial x-axis at t = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constants import EARTH_RADIUS_KM, EARTH_ROTATION_RAD_S, MU_EARTH_KM3_S2


class ConfigError(ValueError):
    """A shell, station, or trial configuration violates its constraints."""


class WalkerPattern(Enum):
    DELTA = "delta"
    STAR = "star"


@dataclass(frozen=True)
class ShellConfig:
    """One orbital shell: planes x sats_per_plane at a common altitude.

    Attributes:
        name: Shell identifier, unique within a catalog.
        planes: Number of orbital planes P (>= 1).
        sats_per_plane: Satellites per plane R (>= 1).
        inclination_deg: Orbital inclination in (0, 180).
        altitude_km: Altitude above the mean Earth radius (> 0).
        min_elevation_deg: Ground-link elevation gate in [0, 90).
        pattern: Walker pattern; Delta spreads RAAN over 360 degrees,
            Star over 180 degrees (creating a seam).
        phasing: Walker phasing F, integer in [0, P).
    """

    name: str
    planes: int
    sats_per_plane: int
    inclination_deg: float
    altitude_km: float
    min_elevation_deg: float
    pattern: WalkerPattern
    phasing: int

    def __post_init__(self) -> None:
        if self.planes < 1 or self.sats_per_plane < 1:
            raise ConfigError(
                f"shell '{self.name}': planes and sats_per_plane must be >= 1, "
                f"got P={self.planes}, R={self.sats_per_plane}"
            )
        if not 0.0 < self.inclination_deg < 180.0:
            raise ConfigError(
                f"shell '{self.name}': inclination must be in (0, 180) degrees, "
                f"got {self.inclination_deg}"
            )
        if self.altitude_km <= 0.0:
            raise ConfigError(
                f"shell '{self.name}': altitude must be positive, got {self.altitude_km}"
            )
        if not 0.0 <= self.min_elevation_deg < 90.0:
            raise ConfigError(
                f"shell '{self.name}': min_elevation must be in [0, 90), "
                f"got {self.min_elevation_deg}"
            )
        if not 0 <= self.phasing < self.planes:
            raise ConfigError(
                f"shell '{self.name}': phasing F must satisfy 0 <= F < P, "
                f"got F={self.phasing}, P={self.planes}"
            )

    @property
    def total_sats(self) -> int:
        return self.planes * self.sats_per_plane

    @property
    def semi_major_axis_km(self) -> float:
        return EARTH_RADIUS_KM + self.altitude_km


@dataclass(frozen=True, order=True)
class SatelliteId:
    """Position of a satellite within its shell; bijective with plane*R + slot."""

    plane: int
    slot: int

    def flat(self, sats_per_plane: int) -> int:
        return self.plane * sats_per_plane + self.slot

    @classmethod
    def from_flat(cls, index: int, sats_per_plane: int) -> "SatelliteId":
        return cls(index // sats_per_plane, index % sats_per_plane)


@dataclass(frozen=True)
class OrbitalElements:
    """Circular-orbit elements; eccentricity is identically zero."""

    raan_rad: float
    arg_latitude_epoch_rad: float
    inclination_rad: float
    semi_major_axis_km: float
    mean_motion_rad_s: float

    @property
    def period_s(self) -> float:
        return 2.0 * math.pi / self.mean_motion_rad_s


@dataclass(frozen=True)
class EcefPosition:
    """Cartesian position in the Earth-Centered Earth-Fixed frame, km."""

    x_km: float
    y_km: float
    z_km: float

    def norm(self) -> float:
        return math.sqrt(self.x_km**2 + self.y_km**2 + self.z_km**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.x_km, self.y_km, self.z_km])


@dataclass(frozen=True)
class GeodeticCoord:
    """Spherical-Earth geodetic coordinate in degrees."""

    lat_deg: float
    lon_deg: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ConfigError(f"latitude out of range [-90, 90]: {self.lat_deg}")
        if not -180.0 <= self.lon_deg <= 180.0:
            raise ConfigError(f"longitude out of range [-180, 180]: {self.lon_deg}")


@dataclass(frozen=True)
class SimClock:
    """Discretized mission horizon: timestamps t_i = i * step for i in [0, N]."""

    horizon_s: float
    step_s: float

    def __post_init__(self) -> None:
        if self.step_s <= 0:
            raise ConfigError(f"clock step must be positive, got {self.step_s}")
        if self.horizon_s < self.step_s:
            raise ConfigError(
                f"horizon {self.horizon_s} s shorter than one step {self.step_s} s"
            )

    @property
    def step_count(self) -> int:
        """N such that t_N = N * step <= horizon."""
        return int(math.floor(self.horizon_s / self.step_s + 1e-9))

    def timestamps(self) -> np.ndarray:
        return np.arange(self.step_count + 1) * self.step_s


def mean_motion_rad_s(semi_major_axis_km: float) -> float:
    """Two-body mean motion n = sqrt(mu / a^3)."""
    return math.sqrt(MU_EARTH_KM3_S2 / semi_major_axis_km**3)


def build_walker(cfg: ShellConfig) -> list[tuple[SatelliteId, OrbitalElements]]:
    """Generate orbital elements for every satellite of a Walker shell.

    Plane p gets RAAN p * 360/P degrees (Delta) or p * 180/P (Star). Slot s
    in plane p starts at argument of latitude s * 360/R + p * F * 360/(P*R).

    Returns:
        P*R entries ordered by flat index (plane-major).
    """
    raan_span = 360.0 if cfg.pattern is WalkerPattern.DELTA else 180.0
    a = cfg.semi_major_axis_km
    n = mean_motion_rad_s(a)
    inc = math.radians(cfg.inclination_deg)
    phase_step = 360.0 / (cfg.planes * cfg.sats_per_plane)

    out: list[tuple[SatelliteId, OrbitalElements]] = []
    for p in range(cfg.planes):
        raan = math.radians(p * raan_span / cfg.planes)
        for s in range(cfg.sats_per_plane):
            u0 = math.radians(
                (s * 360.0 / cfg.sats_per_plane + p * cfg.phasing * phase_step) % 360.0
            )
            out.append(
                (
                    SatelliteId(p, s),
                    OrbitalElements(
                        raan_rad=raan,
                        arg_latitude_epoch_rad=u0,
                        inclination_rad=inc,
                        semi_major_axis_km=a,
                        mean_motion_rad_s=n,
                    ),
                )
            )
    return out


def _inertial_position(elem: OrbitalElements, t_s: float) -> tuple[float, float, float]:
    u = elem.arg_latitude_epoch_rad + elem.mean_motion_rad_s * t_s
    cu, su = math.cos(u), math.sin(u)
    co, so = math.cos(elem.raan_rad), math.sin(elem.raan_rad)
    ci, si = math.cos(elem.inclination_rad), math.sin(elem.inclination_rad)
    a = elem.semi_major_axis_km
    return (
        a * (co * cu - so * su * ci),
        a * (so * cu + co * su * ci),
        a * (su * si),
    )


def propagate(elem: OrbitalElements, t_s: float) -> EcefPosition:
    """Circular-orbit position at time t, rotated into the ECEF frame.

    The orbit angle advances as u(t) = u0 + n*t on the plane defined by
    (RAAN, inclination); the inertial result is rotated about the z-axis
    by -omega_E * t. The returned vector has norm a exactly (up to float
    rounding).
    """
    if t_s < 0:
        raise ValueError(f"propagation time must be non-negative, got {t_s}")
    xi, yi, zi = _inertial_position(elem, t_s)
    theta = EARTH_ROTATION_RAD_S * t_s
    ct, st = math.cos(theta), math.sin(theta)
    # Rz(-theta) applied to the inertial vector.
    return EcefPosition(xi * ct + yi * st, -xi * st + yi * ct, zi)


def subsatellite_point(pos: EcefPosition | np.ndarray) -> GeodeticCoord:
    """Spherical-Earth geodetic point directly beneath an ECEF position.

    Longitude at the exact pole follows atan2(0, 0) = 0.
    """
    if isinstance(pos, EcefPosition):
        x, y, z = pos.x_km, pos.y_km, pos.z_km
    else:
        x, y, z = float(pos[0]), float(pos[1]), float(pos[2])
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0.0:
        raise ValueError("cannot take sub-satellite point of the zero vector")
    return GeodeticCoord(math.degrees(math.asin(z / r)), math.degrees(math.atan2(y, x)))


def geodetic_to_ecef(g: GeodeticCoord, altitude_km: float = 0.0) -> EcefPosition:
    """Spherical-Earth inverse of ``subsatellite_point`` at radius R_E + altitude."""
    r = EARTH_RADIUS_KM + altitude_km
    lat = math.radians(g.lat_deg)
    lon = math.radians(g.lon_deg)
    return EcefPosition(
        r * math.cos(lat) * math.cos(lon),
        r * math.cos(lat) * math.sin(lon),
        r * math.sin(lat),
    )


class ShellElements:
    """Vectorized view of a shell's elements for bulk propagation.

    All satellites of one shell share semi-major axis, inclination, and mean
    motion; only RAAN and epoch argument of latitude vary. ``positions_at``
    propagates every satellite in one numpy pass and matches ``propagate``
    element-wise.
    """

    def __init__(self, elements: list[tuple[SatelliteId, OrbitalElements]]):
        if not elements:
            raise ConfigError("cannot build ShellElements from an empty shell")
        first = elements[0][1]
        self.count = len(elements)
        self.semi_major_axis_km = first.semi_major_axis_km
        self.inclination_rad = first.inclination_rad
        self.mean_motion_rad_s = first.mean_motion_rad_s
        self.raan = np.array([e.raan_rad for _, e in elements])
        self.u0 = np.array([e.arg_latitude_epoch_rad for _, e in elements])
        self.ids = [sid for sid, _ in elements]

    @classmethod
    def from_config(cls, cfg: ShellConfig) -> "ShellElements":
        return cls(build_walker(cfg))

    def positions_at(self, t_s: float) -> np.ndarray:
        """ECEF positions of all satellites at time t, shape (N, 3) in km."""
        u = self.u0 + self.mean_motion_rad_s * t_s
        cu, su = np.cos(u), np.sin(u)
        co, so = np.cos(self.raan), np.sin(self.raan)
        ci = math.cos(self.inclination_rad)
        si = math.sin(self.inclination_rad)
        a = self.semi_major_axis_km
        xi = a * (co * cu - so * su * ci)
        yi = a * (so * cu + co * su * ci)
        zi = a * su * si
        theta = EARTH_ROTATION_RAD_S * t_s
        ct, st = math.cos(theta), math.sin(theta)
        return np.column_stack((xi * ct + yi * st, -xi * st + yi * ct, zi))
