"""Walker generation and propagation: spec examples plus orbit invariants."""
import math

import numpy as np
import pytest

from aoisim.constants import EARTH_RADIUS_KM, EARTH_ROTATION_RAD_S
from aoisim.constellation import (
    ConfigError,
    EcefPosition,
    GeodeticCoord,
    OrbitalElements,
    SatelliteId,
    ShellConfig,
    ShellElements,
    SimClock,
    WalkerPattern,
    build_walker,
    geodetic_to_ecef,
    mean_motion_rad_s,
    propagate,
    subsatellite_point,
)


def shell(
    planes=4, sats=4, inc=53.0, alt=550.0, elev=25.0, pattern=WalkerPattern.DELTA, f=0
) -> ShellConfig:
    return ShellConfig("test", planes, sats, inc, alt, elev, pattern, f)


class TestShellConfig:
    def test_rejects_zero_planes(self):
        with pytest.raises(ConfigError):
            shell(planes=0)

    def test_rejects_zero_sats(self):
        with pytest.raises(ConfigError):
            shell(sats=0)

    def test_rejects_phasing_ge_planes(self):
        with pytest.raises(ConfigError, match="phasing"):
            shell(planes=3, f=3)

    def test_rejects_bad_elevation(self):
        with pytest.raises(ConfigError):
            shell(elev=90.0)

    def test_total(self):
        assert shell(planes=6, sats=7).total_sats == 42


class TestBuildWalker:
    def test_singleton_shell(self):
        entries = build_walker(shell(planes=1, sats=1, f=0))
        assert len(entries) == 1
        sid, elem = entries[0]
        assert sid == SatelliteId(0, 0)
        assert elem.raan_rad == 0.0
        assert elem.arg_latitude_epoch_rad == 0.0

    def test_delta_raan_and_phase_offset(self):
        # P=3, R=2, F=1 Delta: RAANs 0/120/240; plane-1 slot-0 phase 60 deg.
        entries = dict(build_walker(shell(planes=3, sats=2, f=1)))
        raans = {round(math.degrees(entries[SatelliteId(p, 0)].raan_rad), 9) for p in range(3)}
        assert raans == {0.0, 120.0, 240.0}
        u0 = math.degrees(entries[SatelliteId(1, 0)].arg_latitude_epoch_rad)
        assert u0 == pytest.approx(60.0)

    def test_star_raan_spacing(self):
        entries = dict(
            build_walker(shell(planes=4, sats=2, pattern=WalkerPattern.STAR, f=0))
        )
        raans = sorted(
            round(math.degrees(entries[SatelliteId(p, 0)].raan_rad), 9) for p in range(4)
        )
        assert raans == [0.0, 45.0, 90.0, 135.0]

    def test_counts_and_distinct_ids(self):
        cfg = shell(planes=5, sats=7, f=2)
        entries = build_walker(cfg)
        assert len(entries) == 35
        assert len({sid for sid, _ in entries}) == 35

    def test_shared_elements(self):
        entries = build_walker(shell(planes=3, sats=3))
        a_set = {e.semi_major_axis_km for _, e in entries}
        n_set = {e.mean_motion_rad_s for _, e in entries}
        assert len(a_set) == 1 and len(n_set) == 1

    def test_delta_shell_symmetry(self):
        # In-plane spacing multiset is identical across planes.
        cfg = shell(planes=4, sats=5, f=3)
        entries = dict(build_walker(cfg))
        spacings = []
        for p in range(cfg.planes):
            u = sorted(
                math.degrees(entries[SatelliteId(p, s)].arg_latitude_epoch_rad) % 360.0
                for s in range(cfg.sats_per_plane)
            )
            gaps = sorted(
                round((u[(i + 1) % len(u)] - u[i]) % 360.0, 6) for i in range(len(u))
            )
            spacings.append(tuple(gaps))
        assert len(set(spacings)) == 1


def equatorial_elements(alt=550.0, u0=0.0, inc=0.0, raan=0.0) -> OrbitalElements:
    a = EARTH_RADIUS_KM + alt
    return OrbitalElements(
        raan_rad=math.radians(raan),
        arg_latitude_epoch_rad=math.radians(u0),
        inclination_rad=math.radians(inc),
        semi_major_axis_km=a,
        mean_motion_rad_s=mean_motion_rad_s(a),
    )


class TestPropagate:
    def test_epoch_equatorial(self):
        pos = propagate(equatorial_elements(), 0.0)
        assert pos.x_km == pytest.approx(EARTH_RADIUS_KM + 550.0)
        assert pos.y_km == pytest.approx(0.0, abs=1e-9)
        assert pos.z_km == pytest.approx(0.0, abs=1e-9)

    def test_polar_pole_crossing(self):
        elem = equatorial_elements(u0=90.0, inc=90.0)
        pos = propagate(elem, 0.0)
        assert pos.z_km == pytest.approx(elem.semi_major_axis_km)
        assert abs(pos.x_km) < 1e-6 and abs(pos.y_km) < 1e-6

    def test_period_closure(self):
        elem = equatorial_elements(u0=30.0, inc=53.0, raan=40.0)
        period = elem.period_s
        p0 = propagate(elem, 0.0).as_array()
        p1 = propagate(elem, period).as_array()
        # Undo the Earth rotation accumulated over one period.
        theta = EARTH_ROTATION_RAD_S * period
        rot = np.array(
            [
                [math.cos(theta), -math.sin(theta), 0.0],
                [math.sin(theta), math.cos(theta), 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        assert np.linalg.norm(rot @ p1 - p0) < 1e-6

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            propagate(equatorial_elements(), -1.0)

    def test_radius_conservation_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            elem = equatorial_elements(
                alt=float(rng.uniform(300, 1500)),
                u0=float(rng.uniform(0, 360)),
                inc=float(rng.uniform(1, 179)),
                raan=float(rng.uniform(0, 360)),
            )
            for t in rng.uniform(0, 86400, size=25):
                r = propagate(elem, float(t)).norm()
                assert abs(r - elem.semi_major_axis_km) / elem.semi_major_axis_km < 1e-6


class TestShellElements:
    def test_matches_scalar_propagation(self):
        cfg = shell(planes=3, sats=4, inc=70.0, f=1)
        entries = build_walker(cfg)
        vec = ShellElements(entries)
        for t in (0.0, 137.5, 5000.0):
            bulk = vec.positions_at(t)
            for k, (_, elem) in enumerate(entries):
                assert np.allclose(bulk[k], propagate(elem, t).as_array(), atol=1e-9)

    def test_flat_index_round_trip(self):
        for idx in range(12):
            sid = SatelliteId.from_flat(idx, 4)
            assert sid.flat(4) == idx


class TestGeodetic:
    def test_subsatellite_equator(self):
        g = subsatellite_point(EcefPosition(EARTH_RADIUS_KM + 550, 0, 0))
        assert (g.lat_deg, g.lon_deg) == (0.0, 0.0)

    def test_subsatellite_pole_longitude_convention(self):
        g = subsatellite_point(EcefPosition(0, 0, EARTH_RADIUS_KM + 550))
        assert g.lat_deg == pytest.approx(90.0)
        assert g.lon_deg == 0.0

    def test_subsatellite_y_axis(self):
        g = subsatellite_point(EcefPosition(0, EARTH_RADIUS_KM + 550, 0))
        assert g.lat_deg == pytest.approx(0.0)
        assert g.lon_deg == pytest.approx(90.0)

    def test_rejects_zero_vector(self):
        with pytest.raises(ValueError):
            subsatellite_point(EcefPosition(0, 0, 0))

    def test_geodetic_to_ecef_axes(self):
        p = geodetic_to_ecef(GeodeticCoord(0, 0), 0.0)
        assert p.as_array() == pytest.approx([EARTH_RADIUS_KM, 0, 0])
        q = geodetic_to_ecef(GeodeticCoord(90, 0), 0.0)
        assert q.z_km == pytest.approx(EARTH_RADIUS_KM)

    def test_round_trip(self):
        g = GeodeticCoord(45.0, -75.0)
        back = subsatellite_point(geodetic_to_ecef(g, 0.0))
        assert back.lat_deg == pytest.approx(g.lat_deg, abs=1e-9)
        assert back.lon_deg == pytest.approx(g.lon_deg, abs=1e-9)

    def test_coordinate_validation(self):
        with pytest.raises(ConfigError):
            GeodeticCoord(91.0, 0.0)
        with pytest.raises(ConfigError):
            GeodeticCoord(0.0, 200.0)


class TestSimClock:
    def test_grid(self):
        clock = SimClock(100.0, 30.0)
        assert clock.step_count == 3
        assert list(clock.timestamps()) == [0.0, 30.0, 60.0, 90.0]

    def test_exact_division(self):
        clock = SimClock(86400.0, 20.0)
        assert clock.step_count == 4320
        ts = clock.timestamps()
        assert ts[0] == 0.0 and ts[-1] == 86400.0
        assert np.all(np.diff(ts) > 0)

    def test_rejects_bad_step(self):
        with pytest.raises(ConfigError):
            SimClock(100.0, 0.0)
        with pytest.raises(ConfigError):
            SimClock(5.0, 10.0)
