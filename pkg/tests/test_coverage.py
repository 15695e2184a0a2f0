"""Swath activation and coverage probability against independent distance oracles."""
import math

import numpy as np
import pytest

from aoisim.constants import EARTH_RADIUS_KM
from aoisim.constellation import (
    GeodeticCoord,
    ShellConfig,
    ShellElements,
    SimClock,
    WalkerPattern,
    geodetic_to_ecef,
    subsatellite_point,
)
from aoisim.coverage import (
    ActiveSet,
    RegionOfInterest,
    SwathModel,
    active_set,
    azimuthal_equidistant_distance,
    coverage_probability,
    is_active,
)

from .synthetic import haversine_km


def square_roi(lat=53.0, lon=-121.5, half_deg=0.4) -> RegionOfInterest:
    return RegionOfInterest.from_latlon(
        "roi",
        [
            [lat - half_deg, lon - half_deg],
            [lat - half_deg, lon + half_deg],
            [lat + half_deg, lon + half_deg],
            [lat + half_deg, lon - half_deg],
        ],
    )


class TestDistance:
    def test_zero_for_same_point(self):
        p = GeodeticCoord(12.0, 34.0)
        assert azimuthal_equidistant_distance(p, p) == 0.0

    def test_quarter_great_circle(self):
        d = azimuthal_equidistant_distance(GeodeticCoord(0, 0), GeodeticCoord(0, 90))
        assert d == pytest.approx(EARTH_RADIUS_KM * math.pi / 2)
        assert d == pytest.approx(10007.5, abs=0.1)

    def test_antipodal(self):
        d = azimuthal_equidistant_distance(GeodeticCoord(0, 0), GeodeticCoord(0, 180))
        assert d == pytest.approx(EARTH_RADIUS_KM * math.pi)
        assert d == pytest.approx(20015.1, abs=0.1)

    def test_symmetry_randomized(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = GeodeticCoord(float(rng.uniform(-90, 90)), float(rng.uniform(-180, 180)))
            b = GeodeticCoord(float(rng.uniform(-90, 90)), float(rng.uniform(-180, 180)))
            assert azimuthal_equidistant_distance(a, b) == pytest.approx(
                azimuthal_equidistant_distance(b, a)
            )

    def test_agrees_with_haversine(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            a = GeodeticCoord(float(rng.uniform(-89, 89)), float(rng.uniform(-180, 180)))
            b = GeodeticCoord(float(rng.uniform(-89, 89)), float(rng.uniform(-180, 180)))
            want = haversine_km(a.lat_deg, a.lon_deg, b.lat_deg, b.lon_deg)
            assert azimuthal_equidistant_distance(a, b) == pytest.approx(want, rel=1e-9)


class TestRegionOfInterest:
    def test_rejects_empty(self):
        with pytest.raises(Exception):
            RegionOfInterest("empty", ())

    def test_centroid_inside_bbox(self):
        roi = square_roi()
        lats = [v.lat_deg for v in roi.vertices]
        lons = [v.lon_deg for v in roi.vertices]
        assert min(lats) <= roi.centroid.lat_deg <= max(lats)
        assert min(lons) <= roi.centroid.lon_deg <= max(lons)


class TestIsActive:
    def test_single_vertex_under_satellite(self):
        roi = RegionOfInterest.from_latlon("pt", [[10.0, 20.0]])
        sat = geodetic_to_ecef(GeodeticCoord(10.0, 20.0), 550.0)
        assert is_active(sat, roi, SwathModel(0.5))

    def test_vertex_beyond_swath(self):
        # Vertex placed 600 great-circle km from the sub-satellite point.
        angle = math.degrees(600.0 / EARTH_RADIUS_KM)
        roi = RegionOfInterest.from_latlon("pt", [[angle, 0.0]])
        sat = geodetic_to_ecef(GeodeticCoord(0.0, 0.0), 550.0)
        assert not is_active(sat, roi, SwathModel(500.0))
        assert is_active(sat, roi, SwathModel(601.0))

    def test_all_vertices_rule(self):
        # Three corners inside, one pushed outside the circle: not active.
        roi = RegionOfInterest.from_latlon(
            "sq", [[0.2, 0.2], [0.2, -0.2], [-0.2, 0.2], [-8.0, 0.0]]
        )
        sat = geodetic_to_ecef(GeodeticCoord(0.0, 0.0), 550.0)
        assert not is_active(sat, roi, SwathModel(500.0))

    def test_monotone_in_swath(self):
        rng = np.random.default_rng(4)
        roi = square_roi()
        for _ in range(40):
            sat = geodetic_to_ecef(
                GeodeticCoord(float(rng.uniform(40, 65)), float(rng.uniform(-140, -100))),
                550.0,
            )
            radii = sorted(rng.uniform(50, 2500, size=4))
            flags = [is_active(sat, roi, SwathModel(r)) for r in radii]
            # once active, stays active at larger radii
            assert flags == sorted(flags)

    def test_rotation_invariance(self):
        # Rotating satellite and RoI by a common longitude offset preserves activity.
        roi_a = square_roi(lat=50.0, lon=10.0)
        roi_b = square_roi(lat=50.0, lon=-60.0)
        sat_a = geodetic_to_ecef(GeodeticCoord(49.0, 11.0), 600.0)
        sat_b = geodetic_to_ecef(GeodeticCoord(49.0, -59.0), 600.0)
        for r in (100.0, 200.0, 400.0, 800.0):
            assert is_active(sat_a, roi_a, SwathModel(r)) == is_active(
                sat_b, roi_b, SwathModel(r)
            )


class TestActiveSet:
    def test_tiny_swath_gives_empty_set(self):
        cfg = ShellConfig("s", 4, 4, 53.0, 550.0, 25.0, WalkerPattern.DELTA, 1)
        pos = ShellElements.from_config(cfg).positions_at(0.0)
        act = active_set(pos, square_roi(), SwathModel(0.001), 0.0, cfg.sats_per_plane)
        assert not act.members

    def test_matches_bruteforce_haversine(self):
        cfg = ShellConfig("s", 6, 6, 60.0, 600.0, 25.0, WalkerPattern.DELTA, 1)
        elements = ShellElements.from_config(cfg)
        roi = square_roi(lat=50.0, lon=-100.0)
        swath = SwathModel(900.0)
        rng = np.random.default_rng(31)
        for t in rng.uniform(0, 7000, size=6):
            pos = elements.positions_at(float(t))
            got = {sid.flat(cfg.sats_per_plane) for sid in
                   active_set(pos, roi, swath, float(t), cfg.sats_per_plane).members}
            want = set()
            for k in range(cfg.total_sats):
                ssp = subsatellite_point(pos[k])
                if all(
                    haversine_km(ssp.lat_deg, ssp.lon_deg, v.lat_deg, v.lon_deg)
                    <= swath.radius_km
                    for v in roi.vertices
                ):
                    want.add(k)
            assert got == want


class TestCoverageProbability:
    def make_sets(self, flags):
        sid = frozenset({__import__("aoisim").SatelliteId(0, 0)})
        return [
            ActiveSet(float(i), sid if f else frozenset()) for i, f in enumerate(flags)
        ]

    def test_full(self):
        assert coverage_probability(self.make_sets([True] * 10)) == 1.0

    def test_none(self):
        assert coverage_probability(self.make_sets([False] * 10)) == 0.0

    def test_half(self):
        flags = [True] * 4320 + [False] * 4320
        assert coverage_probability(self.make_sets(flags)) == 0.5

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            coverage_probability([])

    def test_grid_length_matches_clock(self):
        clock = SimClock(86400.0, 10.0)
        assert clock.step_count + 1 == 8641
