"""Sensing-task creation, compute-delay model, and payload packetization.

Each covered step spawns one task: the active satellite closest to the RoI
centroid becomes the master, its ISL neighbors become workers, and the
fire-mask payload is split evenly across master + workers. The compute
stage costs a preprocessing delay plus the single-node inference time
divided by the number of compute sources; delays use measured means by
default, with an optional truncated-normal stochastic mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constants import DEFAULT_MTU_BYTES, EARTH_RADIUS_KM
from .constellation import SatelliteId, ShellConfig
from .coverage import ActiveSet, RegionOfInterest, _unit_vector
from .netsim import Packet
from .topology import isl_neighbors


@dataclass(frozen=True)
class ComputeParams:
    """Measured on-board processing model and scene geometry.

    The default delays are HPC-measured means for splitting a 7811x7931
    pixel scene into 256-pixel patches and running full-scene inference;
    the sigmas apply only in stochastic mode.
    """

    preprocess_delay_s: float = 49.62
    inference_delay_s: float = 43.27
    preprocess_sigma_s: float = 12.28
    inference_sigma_s: float = 9.00
    scene_width_px: int = 7811
    scene_height_px: int = 7931
    patch_size_px: int = 256
    mask_bits_per_pixel: int = 1

    def __post_init__(self) -> None:
        if self.preprocess_delay_s < 0 or self.inference_delay_s < 0:
            raise ValueError("compute delays must be non-negative")
        if self.scene_width_px <= 0 or self.scene_height_px <= 0:
            raise ValueError("scene dimensions must be positive")
        if self.patch_size_px <= 0:
            raise ValueError("patch size must be positive")

    @property
    def mask_total_bytes(self) -> int:
        bits = self.scene_width_px * self.scene_height_px * self.mask_bits_per_pixel
        return (bits + 7) // 8

    @property
    def patch_count(self) -> int:
        cols = math.ceil(self.scene_width_px / self.patch_size_px)
        rows = math.ceil(self.scene_height_px / self.patch_size_px)
        return cols * rows


@dataclass(frozen=True)
class FireMaskPayload:
    """Transmitted size of one binary fire mask."""

    total_bytes: int

    def __post_init__(self) -> None:
        if self.total_bytes <= 0:
            raise ValueError("fire mask payload must be positive")

    @classmethod
    def from_params(cls, params: ComputeParams) -> "FireMaskPayload":
        return cls(params.mask_total_bytes)


class TaskState(Enum):
    COMPUTING = "computing"
    TRANSMITTING = "transmitting"
    COMPLETE = "complete"
    SUPERSEDED = "superseded"


_FORWARD = {
    TaskState.COMPUTING: {TaskState.TRANSMITTING, TaskState.SUPERSEDED},
    TaskState.TRANSMITTING: {TaskState.COMPLETE, TaskState.SUPERSEDED},
    TaskState.COMPLETE: set(),
    TaskState.SUPERSEDED: set(),
}


class SensingTask:
    """One capture event and its distributed compute/transmit lifecycle."""

    __slots__ = (
        "task_id",
        "generation_time_s",
        "master",
        "workers",
        "source_bytes",
        "compute_ready_time_s",
        "packet_count_total",
        "delivered_packets",
        "patch_count",
        "state",
    )

    def __init__(
        self,
        task_id: int,
        generation_time_s: float,
        master: SatelliteId,
        workers: frozenset[SatelliteId],
        source_bytes: dict[SatelliteId, int],
        compute_ready_time_s: float,
        packet_count_total: int,
        patch_count: int,
    ):
        self.task_id = task_id
        self.generation_time_s = generation_time_s
        self.master = master
        self.workers = workers
        self.source_bytes = source_bytes
        self.compute_ready_time_s = compute_ready_time_s
        self.packet_count_total = packet_count_total
        self.delivered_packets = 0
        self.patch_count = patch_count
        self.state = TaskState.COMPUTING

    def _transition(self, new: TaskState) -> None:
        if new not in _FORWARD[self.state]:
            raise ValueError(f"task {self.task_id}: illegal transition {self.state} -> {new}")
        self.state = new

    def mark_transmitting(self) -> None:
        self._transition(TaskState.TRANSMITTING)

    def mark_complete(self) -> None:
        self._transition(TaskState.COMPLETE)

    def mark_superseded(self) -> None:
        self._transition(TaskState.SUPERSEDED)


def parallel_compute_delay(inference_delay_s: float, worker_count: int) -> float:
    """Effective inference delay with the master plus workers in parallel."""
    return inference_delay_s / (1 + worker_count)


def select_master(
    active: ActiveSet,
    roi: RegionOfInterest,
    positions: np.ndarray,
    sats_per_plane: int,
) -> SatelliteId | None:
    """Active satellite whose sub-satellite point is closest to the RoI centroid.

    Ties break toward the smallest (plane, slot). Returns None when the
    active set is empty.
    """
    if not active.members:
        return None
    centroid_unit = _unit_vector(roi.centroid)
    best: tuple[float, SatelliteId] | None = None
    for sid in sorted(active.members):
        pos = positions[sid.flat(sats_per_plane)]
        unit = pos / np.linalg.norm(pos)
        angle = math.atan2(
            float(np.linalg.norm(np.cross(unit, centroid_unit))),
            float(np.dot(unit, centroid_unit)),
        )
        dist = EARTH_RADIUS_KM * angle
        if best is None or dist < best[0]:
            best = (dist, sid)
    return best[1]


def assign_workers(master: SatelliteId, shell: ShellConfig) -> frozenset[SatelliteId]:
    """Worker set: every Grid+ ISL neighbor of the master (at most four)."""
    return frozenset(isl_neighbors(master, shell))


def split_payload(total_bytes: int, source_count: int) -> list[int]:
    """Even byte shares across sources; the first (master) takes the remainder."""
    base = total_bytes // source_count
    shares = [base] * source_count
    shares[0] += total_bytes - base * source_count
    return shares


def sample_delays(
    params: ComputeParams, rng: np.random.Generator
) -> tuple[float, float]:
    """Draw (preprocess, inference) delays from zero-truncated normals."""
    delays = []
    for mu, sigma in (
        (params.preprocess_delay_s, params.preprocess_sigma_s),
        (params.inference_delay_s, params.inference_sigma_s),
    ):
        value = rng.normal(mu, sigma)
        while value < 0.0:
            value = rng.normal(mu, sigma)
        delays.append(value)
    return delays[0], delays[1]


def create_task(
    task_id: int,
    t_s: float,
    master: SatelliteId,
    workers: frozenset[SatelliteId],
    params: ComputeParams,
    mtu_bytes: int = DEFAULT_MTU_BYTES,
    rng: np.random.Generator | None = None,
) -> SensingTask:
    """Build a SensingTask generated at t with its payload split and timing.

    With an rng the compute delays are drawn per task from zero-truncated
    normals; otherwise the measured means apply. Patches are distributed to
    workers at no modeled transfer cost: the parallel speedup formula is
    pure division, and the measured delays already cover the full scene.
    """
    if mtu_bytes <= 0:
        raise ValueError(f"MTU must be positive, got {mtu_bytes}")
    if rng is None:
        pre, inf = params.preprocess_delay_s, params.inference_delay_s
    else:
        pre, inf = sample_delays(params, rng)
    ready = t_s + pre + parallel_compute_delay(inf, len(workers))

    total = params.mask_total_bytes
    sources = [master] + sorted(workers)
    shares = split_payload(total, len(sources)) if total > 0 else [0] * len(sources)
    source_bytes = dict(zip(sources, shares))
    packet_total = sum(_packet_count(b, mtu_bytes) for b in shares)

    return SensingTask(
        task_id=task_id,
        generation_time_s=t_s,
        master=master,
        workers=workers,
        source_bytes=source_bytes,
        compute_ready_time_s=ready,
        packet_count_total=packet_total,
        patch_count=params.patch_count,
    )


def _packet_count(nbytes: int, mtu_bytes: int) -> int:
    return (nbytes + mtu_bytes - 1) // mtu_bytes


def packetize(
    source: SatelliteId | int,
    nbytes: int,
    mtu_bytes: int,
    task: SensingTask,
    sats_per_plane: int | None = None,
) -> list[Packet]:
    """Fragment one source's share into MTU-sized packets.

    All packets carry the full MTU except a final remainder; each one is
    tagged with (task_id, source, sequence). The source may be given as a
    SatelliteId (with sats_per_plane for the flat node index) or directly
    as a node id.
    """
    if mtu_bytes <= 0:
        raise ValueError(f"MTU must be positive, got {mtu_bytes}")
    if isinstance(source, SatelliteId):
        if sats_per_plane is None:
            raise ValueError("sats_per_plane required to flatten a SatelliteId source")
        node = source.flat(sats_per_plane)
    else:
        node = source
    packets = []
    remaining = nbytes
    seq = 0
    while remaining > 0:
        chunk = min(mtu_bytes, remaining)
        packets.append(Packet(task.task_id, node, seq, chunk * 8))
        remaining -= chunk
        seq += 1
    return packets


def task_packets(
    task: SensingTask, mtu_bytes: int, sats_per_plane: int
) -> list[Packet]:
    """All packets of a task, master first then workers in id order."""
    out: list[Packet] = []
    for sid in [task.master] + sorted(task.workers):
        out.extend(packetize(sid, task.source_bytes[sid], mtu_bytes, task, sats_per_plane))
    return out
