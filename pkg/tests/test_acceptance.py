"""Acceptance suite: every exit criterion at its stated tolerance.

Each test prints one PASS/FAIL line (visible with -v/-s) and asserts the
criterion exactly as specified. The heavyweight trials (24 h horizons) make
this module the slow part of the suite: a few minutes end to end.
"""
import functools
import math
from pathlib import Path

import numpy as np
import pytest

from aoisim.constellation import (
    ShellConfig,
    ShellElements,
    WalkerPattern,
    build_walker,
)
from aoisim.coverage import RegionOfInterest
from aoisim.harness import (
    TrialSpec,
    load_catalog,
    load_roi,
    load_stations,
    run_trial,
    simulate,
)
from aoisim.metrics import AoITimeline, sample_series
from aoisim.netsim import DeliveryRecord, NetworkEngine, Packet
from aoisim.topology import IslGrid, path_cost, shortest_path

from .synthetic import (
    OracleTask,
    brute_force_completions,
    enumerate_best_path,
    random_connected_snapshot,
)

REPO = Path(__file__).resolve().parent.parent
CATALOG = REPO / "configs" / "catalog.toml"

PROCESSING_FLOOR_S = 49.62 + 43.27 / 5  # delta_pre + delta_inf / (1 + 4 workers)


def criterion(name):
    """Print one pass/fail line per acceptance criterion."""

    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {name}: FAIL")
                raise
            print(f"ACCEPTANCE {name}: PASS")
            return result

        return wrapper

    return deco


@pytest.fixture(scope="module")
def catalog():
    return load_catalog(CATALOG)


@pytest.fixture(scope="module")
def stations():
    return load_stations(CATALOG)


@pytest.fixture(scope="module")
def bc_roi():
    return load_roi(CATALOG)


@pytest.fixture(scope="module")
def roi_45n():
    # Same rectangle shifted to 45 N so the 51.9-degree shells can stand
    # directly over it (needed for nonzero coverage at a 100 km swath).
    return RegionOfInterest.from_latlon(
        "interior_45n",
        [[44.6, -122.0], [44.6, -121.0], [45.4, -121.0], [45.4, -122.0]],
    )


class TestProcessingFloor:
    @criterion("processing-floor-reproduction")
    def test_dense_shell_24h(self, catalog, stations, bc_roi):
        # Table I best shells report 66.5 s average / 76.0 s peak; the check
        # is +/-15% of 66.5 on the average and peak < 100 s.
        spec = TrialSpec(
            shell=catalog["kuiper_k1"],
            station=stations["winnipeg"],
            roi=bc_roi,
            swath_km=500.0,
            dt_s=20.0,
            horizon_s=86400.0,
        )
        res = run_trial(spec)
        assert res.coverage_probability == 1.0  # precondition: continuous coverage
        assert 58.0 <= res.average_aoi_s <= 77.0
        assert res.peak_aoi_s < 100.0
        assert res.wall_clock_s < 120.0


class TestFloorDecomposition:
    @criterion("floor-decomposition")
    def test_interval_ordering(self, catalog, stations, bc_roi):
        # Strict ordering of Table III requires the stochastic delay mode:
        # with deterministic delays the sampled AoI quantizes to the same
        # 60 s grid value for all three step sizes (see decisions ledger).
        averages = {}
        for dt in (10.0, 20.0, 30.0):
            res = run_trial(
                TrialSpec(
                    shell=catalog["kuiper_k1"],
                    station=stations["winnipeg"],
                    roi=bc_roi,
                    swath_km=500.0,
                    dt_s=dt,
                    horizon_s=86400.0,
                    stochastic=True,
                    seed=7,
                )
            )
            assert res.coverage_probability == 1.0
            averages[dt] = res.average_aoi_s
        assert all(avg >= 58.27 for avg in averages.values())
        assert averages[10.0] < averages[20.0] < averages[30.0]


class TestSwathMonotonicity:
    @criterion("swath-monotonicity")
    def test_decreasing_with_diminishing_returns(self, catalog, stations, roi_45n):
        swaths = [100.0, 200.0, 300.0, 400.0, 500.0]
        avg = {}
        for s in swaths:
            res = run_trial(
                TrialSpec(
                    shell=catalog["kuiper_k1"],
                    station=stations["winnipeg"],
                    roi=roi_45n,
                    swath_km=s,
                    dt_s=20.0,
                    horizon_s=21600.0,
                )
            )
            avg[s] = res.average_aoi_s
        assert all(avg[a] > avg[b] for a, b in zip(swaths, swaths[1:]))
        assert (avg[100.0] - avg[300.0]) > (avg[300.0] - avg[500.0])


def _spearman(x: np.ndarray, y: np.ndarray) -> float:
    def ranks(v: np.ndarray) -> np.ndarray:
        order = np.argsort(v, kind="stable")
        r = np.empty(len(v))
        r[order] = np.arange(1, len(v) + 1)
        # average ranks over ties
        for value in np.unique(v):
            mask = v == value
            r[mask] = r[mask].mean()
        return r

    rx, ry = ranks(x), ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float((rx @ ry) / math.sqrt((rx @ rx) * (ry @ ry)))


class TestCoverageAoiRelation:
    @criterion("coverage-aoi-inverse-relation")
    def test_rank_correlation_and_spread(self, stations, roi_45n):
        rows = []
        for planes, sats in [(6, 6), (8, 8), (10, 10), (12, 12), (16, 16), (20, 20), (26, 26), (34, 34)]:
            shell = ShellConfig(
                f"dense_{planes}x{sats}", planes, sats, 53.0, 600.0, 25.0,
                WalkerPattern.DELTA, 1,
            )
            for swath in (200.0, 350.0, 500.0, 700.0):
                res = run_trial(
                    TrialSpec(
                        shell=shell,
                        station=stations["winnipeg"],
                        roi=roi_45n,
                        swath_km=swath,
                        dt_s=30.0,
                        horizon_s=21600.0,
                    )
                )
                rows.append((res.coverage_probability, res.average_aoi_s))

        cov = np.array([r[0] for r in rows])
        aoi = np.array([r[1] for r in rows])
        assert len(rows) >= 20
        assert cov.min() <= 0.10 and cov.max() == 1.0  # spans 10%..100%
        assert _spearman(cov, aoi) < -0.5

        full = aoi[cov >= 1.0]
        mid = aoi[(cov >= 0.40) & (cov <= 0.60)]
        assert len(full) >= 2 and len(mid) >= 2
        assert np.std(full) < np.std(mid)


class TestNetsimOracle:
    @criterion("netsim-oracle-equivalence")
    def test_exact_completion_times(self):
        rng = np.random.default_rng(424242)
        fixtures = 0
        while fixtures < 60:
            snap = random_connected_snapshot(rng, max_sats=4)  # <= 5 nodes total
            n_tasks = int(rng.integers(1, 4))
            tasks = []
            ready = 0.0
            for tid in range(n_tasks):
                ready += float(rng.uniform(0.0, 0.02))
                n_pkts = int(rng.integers(1, 11))
                sources = rng.integers(0, snap.sat_count, size=n_pkts)
                sizes = rng.integers(100, 65535 * 8, size=n_pkts)
                tasks.append(
                    (tid, ready, [(int(s), int(b)) for s, b in zip(sources, sizes)])
                )

            engine = NetworkEngine(ground_node=snap.ground_node, route_bits=65535 * 8)
            engine.set_snapshot(snap)
            for tid, ready, specs in tasks:
                pkts = [Packet(tid, src, k, bits) for k, (src, bits) in enumerate(specs)]
                engine.submit_task(OracleTask(tid, 0.0, ready, len(pkts)), pkts)
            engine.advance_to(1e9)

            got = {r.task_id: r.completion_time_s for r in engine.delivery_records}
            want = brute_force_completions(snap, tasks, route_bits=65535 * 8)
            assert got == want  # zero tolerance
            fixtures += 1


class TestRoutingOracle:
    @criterion("routing-oracle")
    def test_200_random_snapshots(self):
        rng = np.random.default_rng(20240517)
        for _ in range(200):
            snap = random_connected_snapshot(rng, max_sats=11)  # <= 12 nodes
            bits = float(rng.uniform(1e3, 6e5))
            src = int(rng.integers(0, snap.sat_count))
            got = shortest_path(snap, src, snap.ground_node, bits)
            want = enumerate_best_path(snap, src, snap.ground_node, bits)
            assert got is not None and want is not None
            got_cost = path_cost(snap, got, bits)
            assert abs(got_cost - want[0]) <= 1e-9 * max(abs(want[0]), 1e-30)


class TestAoiProperties:
    @criterion("aoi-property-suite")
    def test_sawtooth_discard_bounds_determinism(self, catalog, stations, bc_roi):
        # Obsolete-update fixture: current AoI 50, arriving age 60 -> discarded.
        timeline = AoITimeline()
        assert timeline.accept_delivery(DeliveryRecord(0, 40.0, 41.0))
        assert timeline.current_aoi(90.0) == 50.0
        assert timeline.accept_delivery(DeliveryRecord(1, 30.0, 90.0)) is False

        # Sawtooth slope: consecutive samples differ by exactly dt between
        # accepted deliveries, on a real covered trial.
        spec = TrialSpec(
            shell=catalog["starlink_s5"],
            station=stations["winnipeg"],
            roi=bc_roi,
            swath_km=700.0,
            dt_s=30.0,
            horizon_s=7200.0,
        )
        res = run_trial(spec)
        assert res.average_aoi_s <= res.peak_aoi_s

        run = simulate(spec)
        clock = run.clock
        samples = sample_series(clock, run.records)
        accepted = []
        tl = AoITimeline()
        for rec in run.records:
            if tl.accept_delivery(rec):
                accepted.append(rec.completion_time_s)
        times = clock.timestamps()
        for i in range(1, len(times)):
            crossed = any(times[i - 1] < c <= times[i] for c in accepted)
            if not crossed:
                assert samples[i] - samples[i - 1] == pytest.approx(spec.dt_s)

        # Determinism: identical runs produce identical CSV rows.
        assert run_trial(spec).row() == res.row()

        # Average <= peak on every trial of a small sweep.
        for swath in (200.0, 400.0, 700.0):
            r = run_trial(
                TrialSpec(
                    shell=catalog["starlink_s5"],
                    station=stations["winnipeg"],
                    roi=bc_roi,
                    swath_km=swath,
                    dt_s=30.0,
                    horizon_s=3600.0,
                )
            )
            assert r.average_aoi_s <= r.peak_aoi_s


class TestOrbitalInvariants:
    @criterion("orbital-invariants")
    def test_radius_counts_degree(self, catalog):
        rng = np.random.default_rng(5150)

        # Radius conservation within 1e-6 relative over 1000 sampled epochs
        # per catalog shell (vectorized over the whole shell per epoch).
        for name in catalog.names():
            shell = catalog[name]
            elements = ShellElements.from_config(shell)
            a = shell.semi_major_axis_km
            epochs = rng.uniform(0.0, 86400.0, size=1000)
            worst = 0.0
            for t in epochs:
                radii = np.linalg.norm(elements.positions_at(float(t)), axis=1)
                worst = max(worst, float(np.abs(radii - a).max()) / a)
            assert worst < 1e-6

            # Walker count: exactly P*R distinct satellites.
            entries = build_walker(shell)
            assert len(entries) == shell.total_sats
            assert len({sid for sid, _ in entries}) == shell.total_sats

        # Degree bound <= 4 over 1000 random shells (ISL structure is
        # time-invariant, so one grid per shell covers all its snapshots).
        for _ in range(1000):
            planes = int(rng.integers(1, 13))
            cfg = ShellConfig(
                "rand",
                planes,
                int(rng.integers(1, 13)),
                float(rng.uniform(30.0, 100.0)),
                550.0,
                25.0,
                rng.choice([WalkerPattern.DELTA, WalkerPattern.STAR]),
                int(rng.integers(0, planes)),
            )
            grid = IslGrid.from_shell(cfg)
            assert max((len(nbrs) for nbrs in grid.adjacency), default=0) <= 4
