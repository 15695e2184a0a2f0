"""Age of Information accounting: sawtooth state, grid sampling, summaries.

AoI(t) = t - I(t), where I(t) is the generation time of the freshest update
received by t. An arriving update resets the sawtooth only if its age beats
the current AoI, i.e. its generation time is newer than I(t); otherwise it
is discarded as obsolete. Before any delivery, I(t) = 0, so AoI grows from
zero at the start of the horizon.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import SimClock
from .netsim import DeliveryRecord


@dataclass(frozen=True)
class AoISummary:
    average_aoi_s: float
    peak_aoi_s: float
    delivered_tasks: int
    superseded_tasks: int
    coverage_probability: float

    def __post_init__(self) -> None:
        if self.peak_aoi_s + 1e-12 < self.average_aoi_s:
            raise ValueError("peak AoI cannot be below average AoI")


class AoITimeline:
    """Online sawtooth state: accepts or discards deliveries as they arrive."""

    def __init__(self) -> None:
        self.accepted: list[DeliveryRecord] = []
        self.superseded_count = 0
        self.latest_generation_s: float | None = None

    def current_aoi(self, t_s: float) -> float:
        """AoI just before time t, under the I(0) = 0 convention."""
        return t_s - (self.latest_generation_s or 0.0)

    def accept_delivery(self, rec: DeliveryRecord) -> bool:
        """Apply the obsolete-update rule; returns True when the reset happens.

        The first delivery is always accepted: the initial state carries no
        real update to supersede it.
        """
        if rec.completion_time_s < rec.generation_time_s:
            raise ValueError(
                f"task {rec.task_id}: completion {rec.completion_time_s} precedes "
                f"generation {rec.generation_time_s}"
            )
        if (
            self.latest_generation_s is None
            or rec.generation_time_s > self.latest_generation_s
        ):
            self.latest_generation_s = rec.generation_time_s
            self.accepted.append(rec)
            return True
        self.superseded_count += 1
        return False


def sample_series(clock: SimClock, deliveries: list[DeliveryRecord]) -> np.ndarray:
    """AoI sampled at every grid timestamp t_i = i * step.

    Deliveries must be ordered by completion time; the obsolete-update
    filter is applied while sweeping the grid.
    """
    timeline = AoITimeline()
    times = clock.timestamps()
    samples = np.empty(len(times))
    k = 0
    latest = 0.0
    for i, t in enumerate(times):
        while k < len(deliveries) and deliveries[k].completion_time_s <= t:
            if timeline.accept_delivery(deliveries[k]):
                latest = deliveries[k].generation_time_s
            k += 1
        samples[i] = t - latest
    return samples


def average_aoi(samples: np.ndarray) -> float:
    """Arithmetic mean of the sampled series (Eq. 2 of the AoI definition)."""
    if len(samples) == 0:
        raise ValueError("cannot average an empty AoI series")
    return float(np.mean(samples))


def peak_aoi(samples: np.ndarray) -> float:
    """Worst-case staleness: the maximum sampled AoI."""
    if len(samples) == 0:
        raise ValueError("cannot take the peak of an empty AoI series")
    return float(np.max(samples))


def summarize(
    clock: SimClock,
    deliveries: list[DeliveryRecord],
    coverage_probability: float,
    *,
    warmup_s: float = 0.0,
) -> AoISummary:
    """Full-trial AoI summary from the raw delivery stream.

    ``warmup_s`` optionally excludes early samples from the statistics;
    the t = 0 reference convention depresses early-horizon averages on
    sparse-coverage shells.
    """
    samples = sample_series(clock, deliveries)
    mask = clock.timestamps() >= warmup_s
    kept = samples[mask]
    timeline = AoITimeline()
    for rec in deliveries:
        timeline.accept_delivery(rec)
    return AoISummary(
        average_aoi_s=average_aoi(kept),
        peak_aoi_s=peak_aoi(kept),
        delivered_tasks=len(deliveries),
        superseded_tasks=timeline.superseded_count,
        coverage_probability=coverage_probability,
    )
