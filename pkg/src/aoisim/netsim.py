"""Packet-level discrete-event engine over unit-capacity links.

Packets acquire a link before transmitting (FIFO, capacity 1), hold it for
the transmission time, then propagate to the far endpoint. Queuing delay is
emergent, never configured. Topology changes arrive as snapshot epochs:
in-flight transmissions finish their hop, everything else is rerouted on
the new graph. Event dispatch order is deterministic: ties break by
insertion ordinal.
"""
from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Callable, TextIO

from .constants import SPEED_OF_LIGHT_KM_S
from .topology import LinkEdge, TopologySnapshot, route_from_tree, routing_tree

EVENT_TASK_READY = "task_ready"
EVENT_LINK_FREE = "link_free"
EVENT_HOP_COMPLETE = "hop_complete"


@dataclass(frozen=True)
class DeliveryRecord:
    """Completion of one sensing task: all packets received at the ground."""

    task_id: int
    generation_time_s: float
    completion_time_s: float


def hop_latency(edge: LinkEdge, size_bits: float, queue_wait_s: float = 0.0) -> float:
    """Latency of one hop: realized queue wait + transmission + propagation."""
    if edge.bandwidth_bps <= 0:
        raise ValueError(f"link bandwidth must be positive, got {edge.bandwidth_bps}")
    return (
        queue_wait_s
        + size_bits / edge.bandwidth_bps
        + edge.distance_km / SPEED_OF_LIGHT_KM_S
    )


class Packet:
    """One MTU-sized fragment of a fire mask in transit."""

    __slots__ = (
        "task_id",
        "source",
        "seq",
        "size_bits",
        "current_node",
        "remaining_route",
        "injected_at",
        "delivered_at",
        "uid",
        "enqueue_time",
        "route_epoch",
    )

    def __init__(self, task_id: int, source: int, seq: int, size_bits: int):
        self.task_id = task_id
        self.source = source
        self.seq = seq
        self.size_bits = size_bits
        self.current_node = source
        self.remaining_route: list[int] = []
        self.injected_at: float | None = None
        self.delivered_at: float | None = None
        self.uid = -1
        self.enqueue_time = 0.0
        self.route_epoch = -1

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"Packet(task={self.task_id}, src={self.source}, seq={self.seq}, "
            f"at={self.current_node})"
        )


class LinkResource:
    """Capacity-1 transmission resource for one directed link."""

    __slots__ = ("busy_until", "queue", "current")

    def __init__(self) -> None:
        self.busy_until = 0.0
        self.queue: deque[Packet] = deque()
        self.current: Packet | None = None


class NetworkEngine:
    """Single-trial event loop; strictly sequential and deterministic."""

    def __init__(
        self,
        ground_node: int,
        *,
        route_bits: int | None = None,
        trace: TextIO | None = None,
        record_occupancy: bool = False,
        on_delivery: Callable[[DeliveryRecord], None] | None = None,
    ):
        self.ground_node = ground_node
        # Route choice uses the fixed MTU when given (packets are MTU-sized
        # except remainders); transmission always uses the true packet size.
        self.route_bits = route_bits
        self.now = 0.0
        self.epoch = -1
        self.snapshot: TopologySnapshot | None = None
        self.delivery_records: list[DeliveryRecord] = []
        self.injected_count = 0
        self.delivered_count = 0
        self._events: list[tuple[float, int, str, tuple]] = []
        self._ordinal = 0
        self._uid = 0
        self._links: dict[tuple[int, int], LinkResource] = {}
        self._parked: list[tuple[float, int, Packet]] = []
        self._pending_tasks: dict[int, int] = {}  # task_id -> packets outstanding
        self._task_meta: dict[int, float] = {}  # task_id -> generation time
        self._trace = trace
        self._on_delivery = on_delivery
        self.occupancy: dict[tuple[int, int], list[tuple[float, float, int]]] | None = (
            {} if record_occupancy else None
        )
        # Routing trees for the current snapshot, keyed by packet size.
        self._trees: dict[int, tuple] = {}

    # ------------------------------------------------------------------
    # scheduling primitives

    def _push(self, time_s: float, kind: str, payload: tuple) -> None:
        heapq.heappush(self._events, (time_s, self._ordinal, kind, payload))
        self._ordinal += 1

    def _emit_trace(self, kind: str, task_id: int, seq: int, u, v) -> None:
        if self._trace is not None:
            self._trace.write(f"{self.now:.9f}\t{kind}\t{task_id}\t{seq}\t{u}\t{v}\n")

    # ------------------------------------------------------------------
    # public API

    def set_snapshot(self, snap: TopologySnapshot) -> None:
        """Install the topology for the epoch starting at snap.time_s."""
        if snap.time_s + 1e-9 < self.now:
            raise ValueError(
                f"snapshot at t={snap.time_s} is older than engine time {self.now}"
            )
        self.now = max(self.now, snap.time_s)
        self.snapshot = snap
        self.epoch += 1
        self._trees.clear()
        if self.epoch > 0:
            self.reroute_in_flight(snap)

    def submit_task(self, task, packets: list[Packet]) -> None:
        """Register a task; its packets inject when the compute stage finishes."""
        if len(packets) != task.packet_count_total:
            raise ValueError(
                f"task {task.task_id}: got {len(packets)} packets, "
                f"expected {task.packet_count_total}"
            )
        self._pending_tasks[task.task_id] = len(packets)
        self._task_meta[task.task_id] = task.generation_time_s
        self._push(task.compute_ready_time_s, EVENT_TASK_READY, (task, packets))

    def inject(self, packet: Packet, at_s: float) -> None:
        """Route a packet toward the ground station and enqueue its first hop.

        Unreachable destinations park the packet; a later snapshot may
        provide a route.
        """
        if packet.uid < 0:
            packet.uid = self._uid
            self._uid += 1
        packet.injected_at = at_s
        self.injected_count += 1
        self._dispatch_packet(packet, at_s, park_time=at_s)

    def advance_to(self, t_limit_s: float, *, inclusive: bool = True) -> None:
        """Dispatch all pending events up to t_limit (<= when inclusive)."""
        events = self._events
        while events:
            t = events[0][0]
            if t > t_limit_s or (not inclusive and t == t_limit_s):
                break
            t, _, kind, payload = heapq.heappop(events)
            self.now = t
            if kind == EVENT_TASK_READY:
                self._handle_task_ready(*payload)
            elif kind == EVENT_LINK_FREE:
                self._handle_link_free(*payload)
            else:
                self._handle_hop_complete(*payload)
        self.now = max(self.now, t_limit_s) if inclusive else self.now

    def reroute_in_flight(self, new_snapshot: TopologySnapshot) -> None:
        """Recompute routes at a snapshot boundary.

        Packets holding a link finish that transmission first and reroute on
        arrival; queued and parked packets reroute now, in a stable order
        (original enqueue time, then uid), which preserves FIFO positions
        when routes are unchanged.
        """
        self.snapshot = new_snapshot
        boundary = self.now
        gather: list[tuple[float, int, Packet]] = []
        for link in self._links.values():
            while link.queue:
                pkt = link.queue.popleft()
                gather.append((pkt.enqueue_time, pkt.uid, pkt))
        gather.extend(self._parked)
        self._parked = []
        gather.sort(key=lambda item: (item[0], item[1]))
        for stamp, _, pkt in gather:
            self._dispatch_packet(pkt, boundary, park_time=stamp)

    def parked_count(self) -> int:
        return len(self._parked)

    def in_flight_count(self) -> int:
        return self.injected_count - self.delivered_count - len(self._parked)

    def packet_census(self) -> dict[str, int]:
        """Conservation view: injected = delivered + in-flight + parked."""
        return {
            "injected": self.injected_count,
            "delivered": self.delivered_count,
            "parked": len(self._parked),
            "in_flight": self.in_flight_count(),
        }

    # ------------------------------------------------------------------
    # routing

    def _tree_for(self, size_bits: int):
        tree = self._trees.get(size_bits)
        if tree is None:
            tree = routing_tree(self.snapshot, self.ground_node, size_bits)
            self._trees[size_bits] = tree
        return tree

    def _dispatch_packet(self, pkt: Packet, at_s: float, park_time: float) -> None:
        """Assign a fresh route from the packet's position, or park it."""
        _, next_hop = self._tree_for(
            self.route_bits if self.route_bits is not None else pkt.size_bits
        )
        route = route_from_tree(next_hop, pkt.current_node, self.ground_node)
        if route is None:
            self._parked.append((park_time, pkt.uid, pkt))
            self._emit_trace("park", pkt.task_id, pkt.seq, pkt.current_node, -1)
            return
        pkt.remaining_route = route[1:]
        pkt.route_epoch = self.epoch
        self._request_link(pkt, at_s)

    # ------------------------------------------------------------------
    # event handlers

    def _handle_task_ready(self, task, packets: list[Packet]) -> None:
        task.mark_transmitting()
        self._emit_trace(EVENT_TASK_READY, task.task_id, -1, -1, -1)
        if not packets:
            self._complete_task(task.task_id, task.generation_time_s)
            return
        for pkt in packets:
            self.inject(pkt, self.now)

    def _request_link(self, pkt: Packet, at_s: float) -> None:
        u = pkt.current_node
        v = pkt.remaining_route[0]
        key = (u, v)
        link = self._links.get(key)
        if link is None:
            link = LinkResource()
            self._links[key] = link
        if link.current is None and link.busy_until <= at_s:
            self._start_transmission(link, key, pkt, at_s)
        else:
            pkt.enqueue_time = at_s
            link.queue.append(pkt)

    def _start_transmission(
        self, link: LinkResource, key: tuple[int, int], pkt: Packet, at_s: float
    ) -> None:
        u, v = key
        dist_km, bw = self.snapshot.edge_params(u, v)
        tx_time = pkt.size_bits / bw
        link.current = pkt
        link.busy_until = at_s + tx_time
        if self.occupancy is not None:
            self.occupancy.setdefault(key, []).append((at_s, at_s + tx_time, pkt.uid))
        self._emit_trace("tx_start", pkt.task_id, pkt.seq, u, v)
        prop = dist_km / SPEED_OF_LIGHT_KM_S
        self._push(at_s + tx_time, EVENT_LINK_FREE, (key, pkt, prop))

    def _handle_link_free(self, key: tuple[int, int], pkt: Packet, prop_s: float) -> None:
        link = self._links[key]
        link.current = None
        self._emit_trace(EVENT_LINK_FREE, pkt.task_id, pkt.seq, key[0], key[1])
        self._push(self.now + prop_s, EVENT_HOP_COMPLETE, (pkt, key[1]))
        if link.queue:
            nxt = link.queue.popleft()
            self._start_transmission(link, key, nxt, self.now)

    def _handle_hop_complete(self, pkt: Packet, node: int) -> None:
        pkt.current_node = node
        pkt.remaining_route.pop(0)
        self._emit_trace(EVENT_HOP_COMPLETE, pkt.task_id, pkt.seq, node, -1)
        if node == self.ground_node:
            pkt.delivered_at = self.now
            self.delivered_count += 1
            remaining = self._pending_tasks[pkt.task_id] - 1
            self._pending_tasks[pkt.task_id] = remaining
            if remaining == 0:
                self._complete_task(pkt.task_id, self._task_meta[pkt.task_id])
            return
        if pkt.route_epoch != self.epoch:
            self._dispatch_packet(pkt, self.now, park_time=self.now)
        else:
            self._request_link(pkt, self.now)

    def _complete_task(self, task_id: int, generation_time_s: float) -> None:
        record = DeliveryRecord(task_id, generation_time_s, self.now)
        self.delivery_records.append(record)
        self._emit_trace("deliver", task_id, -1, self.ground_node, -1)
        if self._on_delivery is not None:
            self._on_delivery(record)
