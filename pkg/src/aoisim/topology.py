"""Per-step communication graph: Grid+ ISLs, elevation-gated ground links.

A ``TopologySnapshot`` freezes the directed graph G(t_i) for one simulation
step. ISL structure is static per shell (two intra-plane and two inter-plane
neighbors, with seam-closing on Star shells); only link distances and the set
of satellite-ground links change between snapshots. Routing minimizes
transmission plus propagation delay; queuing is a traversal-time effect and
is deliberately excluded from route choice.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence, TextIO

import numpy as np

from .constants import (
    DEFAULT_ISL_BANDWIDTH_BPS,
    DEFAULT_SGL_BANDWIDTH_BPS,
    EARTH_RADIUS_KM,
    SPEED_OF_LIGHT_KM_S,
)
from .constellation import (
    EcefPosition,
    GeodeticCoord,
    SatelliteId,
    ShellConfig,
    ShellElements,
    WalkerPattern,
    geodetic_to_ecef,
)


class LinkKind(Enum):
    INTRA_PLANE_ISL = "intra_plane_isl"
    INTER_PLANE_ISL = "inter_plane_isl"
    SGL = "sgl"


@dataclass(frozen=True)
class GroundStation:
    """A fixed ground station at sea level (spherical Earth)."""

    name: str
    location: GeodeticCoord

    @property
    def ecef(self) -> EcefPosition:
        return geodetic_to_ecef(self.location, 0.0)

    def ecef_array(self) -> np.ndarray:
        return self.ecef.as_array()


@dataclass(frozen=True)
class LinkEdge:
    """One undirected link with its per-snapshot distance and bandwidth."""

    u: int
    v: int
    kind: LinkKind
    distance_km: float
    bandwidth_bps: float


def elevation_angle(gs: EcefPosition | np.ndarray, sat: EcefPosition | np.ndarray) -> float:
    """Elevation of a satellite above the local horizontal plane, degrees.

    Computed as asin of the line-of-sight component along the station's
    local vertical; negative below the horizon.
    """
    g = gs.as_array() if isinstance(gs, EcefPosition) else np.asarray(gs, dtype=float)
    s = sat.as_array() if isinstance(sat, EcefPosition) else np.asarray(sat, dtype=float)
    los = s - g
    dist = float(np.linalg.norm(los))
    if dist == 0.0:
        raise ValueError("satellite and ground station positions coincide")
    g_unit = g / np.linalg.norm(g)
    ratio = float(np.dot(g_unit, los)) / dist
    return math.degrees(math.asin(max(-1.0, min(1.0, ratio))))


def isl_neighbors(sat: SatelliteId, cfg: ShellConfig) -> list[SatelliteId]:
    """Grid+ neighbors of a satellite: slot +/-1 in plane, same slot across planes.

    On Star shells the wraparound pair (plane P-1, plane 0) is the seam;
    crossing it shifts the slot by the phasing F. Duplicate neighbors from
    small modular wraps (R <= 2, P <= 2) collapse, and the satellite itself
    is never its own neighbor.
    """
    p, s = sat.plane, sat.slot
    P, R = cfg.planes, cfg.sats_per_plane
    result: list[SatelliteId] = []

    for ds in (-1, 1):
        nb = SatelliteId(p, (s + ds) % R)
        if nb != sat and nb not in result:
            result.append(nb)

    if P > 1:
        seam_offset = cfg.phasing if cfg.pattern is WalkerPattern.STAR else 0
        for dp in (-1, 1):
            q = (p + dp) % P
            crosses_seam = (p == P - 1 and dp == 1) or (p == 0 and dp == -1)
            if crosses_seam:
                # Seam maps slot s in plane P-1 to slot s+F in plane 0.
                slot = (s + seam_offset) % R if p == P - 1 else (s - seam_offset) % R
            else:
                slot = s
            nb = SatelliteId(q, slot)
            if nb != sat and nb not in result:
                result.append(nb)

    return result


class IslGrid:
    """Static ISL edge structure for one shell, shared by all snapshots.

    Holds the undirected pair list plus a flat adjacency (neighbor node and
    edge index per satellite) so snapshots only recompute distances.
    """

    def __init__(
        self,
        sat_count: int,
        pairs: Sequence[tuple[int, int]],
        kinds: Sequence[int] | None = None,
    ):
        self.sat_count = sat_count
        self.pairs = np.array(pairs, dtype=np.int32).reshape(len(pairs), 2)
        self.kinds = (
            np.array(kinds, dtype=np.uint8)
            if kinds is not None
            else np.zeros(len(pairs), dtype=np.uint8)
        )
        self.edge_count = len(pairs)

        adj: list[list[tuple[int, int]]] = [[] for _ in range(sat_count)]
        for e, (u, v) in enumerate(pairs):
            adj[u].append((v, e))
            adj[v].append((u, e))
        self.adjacency = tuple(tuple(nbrs) for nbrs in adj)

    @classmethod
    def from_shell(cls, cfg: ShellConfig) -> "IslGrid":
        """Grid+ structure: up to two intra-plane and two inter-plane links each."""
        R = cfg.sats_per_plane
        pairs: list[tuple[int, int]] = []
        kinds: list[int] = []
        seen: set[tuple[int, int]] = set()
        for p in range(cfg.planes):
            for s in range(R):
                sat = SatelliteId(p, s)
                u = sat.flat(R)
                for nb in isl_neighbors(sat, cfg):
                    v = nb.flat(R)
                    key = (min(u, v), max(u, v))
                    if key in seen:
                        continue
                    seen.add(key)
                    pairs.append(key)
                    kinds.append(0 if nb.plane == p else 1)
        return cls(cfg.total_sats, pairs, kinds)

    def edge_vectors(self, positions: np.ndarray) -> np.ndarray:
        """Euclidean length of every ISL given satellite positions (N, 3)."""
        if self.edge_count == 0:
            return np.zeros(0)
        diff = positions[self.pairs[:, 0]] - positions[self.pairs[:, 1]]
        return np.linalg.norm(diff, axis=1)


class TopologySnapshot:
    """The communication graph at one timestamp; immutable once built.

    Satellite nodes are flat indices [0, N); the ground station is node N.
    ISL bandwidth may be a scalar or a per-edge array; likewise for SGLs.
    """

    def __init__(
        self,
        time_s: float,
        grid: IslGrid,
        positions: np.ndarray,
        isl_dist: np.ndarray,
        sgl_sats: np.ndarray,
        sgl_dist: np.ndarray,
        isl_bandwidth_bps: float | np.ndarray = DEFAULT_ISL_BANDWIDTH_BPS,
        sgl_bandwidth_bps: float | np.ndarray = DEFAULT_SGL_BANDWIDTH_BPS,
        station: GroundStation | None = None,
    ):
        self.time_s = time_s
        self.grid = grid
        self.positions = positions  # (N+1, 3); last row is the ground station
        self.sat_count = positions.shape[0] - 1
        self.ground_node = self.sat_count
        self.isl_dist = isl_dist
        self.sgl_sats = sgl_sats
        self.sgl_dist = sgl_dist
        self.isl_bandwidth_bps = isl_bandwidth_bps
        self.sgl_bandwidth_bps = sgl_bandwidth_bps
        self.station = station
        self._sgl_index = {int(s): k for k, s in enumerate(sgl_sats)}

    @property
    def node_count(self) -> int:
        return self.sat_count + 1

    def has_node(self, node: int) -> bool:
        return 0 <= node <= self.ground_node

    def position_of(self, node: int) -> np.ndarray:
        return self.positions[node]

    def _isl_bw(self, edge: int) -> float:
        bw = self.isl_bandwidth_bps
        return float(bw[edge]) if isinstance(bw, np.ndarray) else bw

    def _sgl_bw(self, k: int) -> float:
        bw = self.sgl_bandwidth_bps
        return float(bw[k]) if isinstance(bw, np.ndarray) else bw

    def neighbors(self, node: int) -> Iterator[tuple[int, float, float]]:
        """Yield (neighbor, distance_km, bandwidth_bps) for every outgoing link."""
        if node == self.ground_node:
            for k, s in enumerate(self.sgl_sats):
                yield int(s), float(self.sgl_dist[k]), self._sgl_bw(k)
            return
        for v, e in self.grid.adjacency[node]:
            yield v, float(self.isl_dist[e]), self._isl_bw(e)
        k = self._sgl_index.get(node)
        if k is not None:
            yield self.ground_node, float(self.sgl_dist[k]), self._sgl_bw(k)

    def edge_params(self, u: int, v: int) -> tuple[float, float]:
        """Distance and bandwidth of the link u-v; raises if absent."""
        for nb, dist, bw in self.neighbors(u):
            if nb == v:
                return dist, bw
        raise KeyError(f"no link between nodes {u} and {v} in snapshot at t={self.time_s}")

    def isl_degree(self, node: int) -> int:
        return len(self.grid.adjacency[node])

    def edges(self) -> Iterator[LinkEdge]:
        """Every undirected link once (ISLs with u < v, then SGLs)."""
        for e in range(self.grid.edge_count):
            u, v = int(self.grid.pairs[e, 0]), int(self.grid.pairs[e, 1])
            kind = (
                LinkKind.INTRA_PLANE_ISL
                if self.grid.kinds[e] == 0
                else LinkKind.INTER_PLANE_ISL
            )
            yield LinkEdge(u, v, kind, float(self.isl_dist[e]), self._isl_bw(e))
        for k, s in enumerate(self.sgl_sats):
            yield LinkEdge(
                int(s), self.ground_node, LinkKind.SGL, float(self.sgl_dist[k]), self._sgl_bw(k)
            )


def build_snapshot(
    shell: ShellConfig,
    elements: ShellElements | list,
    gs: GroundStation,
    t_s: float,
    *,
    grid: IslGrid | None = None,
    isl_bandwidth_bps: float = DEFAULT_ISL_BANDWIDTH_BPS,
    sgl_bandwidth_bps: float = DEFAULT_SGL_BANDWIDTH_BPS,
) -> TopologySnapshot:
    """Propagate the shell to time t and assemble G(t).

    SGL edges exist exactly for satellites whose elevation from the station
    is at least the shell's minimum; the elevation test is evaluated in its
    sine form to avoid per-satellite trigonometry.
    """
    if not isinstance(elements, ShellElements):
        elements = ShellElements(elements)
    grid = grid if grid is not None else IslGrid.from_shell(shell)

    sat_pos = elements.positions_at(t_s)
    gs_vec = gs.ecef_array()
    positions = np.vstack((sat_pos, gs_vec[None, :]))

    isl_dist = grid.edge_vectors(sat_pos)

    los = sat_pos - gs_vec
    dist = np.linalg.norm(los, axis=1)
    g_unit = gs_vec / np.linalg.norm(gs_vec)
    sin_elev = (los @ g_unit) / dist
    visible = sin_elev >= math.sin(math.radians(shell.min_elevation_deg))
    sgl_sats = np.nonzero(visible)[0].astype(np.int32)
    sgl_dist = dist[visible]

    return TopologySnapshot(
        time_s=t_s,
        grid=grid,
        positions=positions,
        isl_dist=isl_dist,
        sgl_sats=sgl_sats,
        sgl_dist=sgl_dist,
        isl_bandwidth_bps=isl_bandwidth_bps,
        sgl_bandwidth_bps=sgl_bandwidth_bps,
        station=gs,
    )


def link_weight(distance_km: float, bandwidth_bps: float, packet_bits: float) -> float:
    """Routing weight of one link: transmission plus propagation delay."""
    return packet_bits / bandwidth_bps + distance_km / SPEED_OF_LIGHT_KM_S


def shortest_path(
    snap: TopologySnapshot, src: int, dst: int, packet_bits: float
) -> list[int] | None:
    """Minimum-latency path from src to dst, or None when unreachable.

    Dijkstra over per-hop transmission + propagation weights. Queuing wait
    is excluded by design: it is a contention effect incurred at traversal
    time, not a property of the static snapshot.
    """
    for node in (src, dst):
        if not snap.has_node(node):
            raise KeyError(f"unknown node id {node}")
    if src == dst:
        return [src]

    dist = {src: 0.0}
    prev: dict[int, int] = {}
    heap: list[tuple[float, int]] = [(0.0, src)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == dst:
            path = [dst]
            while path[-1] != src:
                path.append(prev[path[-1]])
            return path[::-1]
        done.add(u)
        for v, d_km, bw in snap.neighbors(u):
            if v in done:
                continue
            nd = d + link_weight(d_km, bw, packet_bits)
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    return None


def path_cost(snap: TopologySnapshot, path: Sequence[int], packet_bits: float) -> float:
    """Sum of link weights along a node path."""
    total = 0.0
    for u, v in zip(path, path[1:]):
        d_km, bw = snap.edge_params(u, v)
        total += link_weight(d_km, bw, packet_bits)
    return total


def routing_tree(
    snap: TopologySnapshot, dst: int, packet_bits: float
) -> tuple[np.ndarray, np.ndarray]:
    """Single-destination shortest-path tree over the whole snapshot.

    Returns (cost, next_hop) arrays indexed by node; next_hop[n] is the
    neighbor of n on its best path toward dst (-1 when unreachable, dst
    itself maps to dst). Link weights are symmetric, so one pass from dst
    serves every source. Edge weights are precomputed in bulk; this runs
    once per snapshot epoch on the engine's hot path.
    """
    if not snap.has_node(dst):
        raise KeyError(f"unknown node id {dst}")
    n = snap.node_count
    ground = snap.ground_node
    inv_c = 1.0 / SPEED_OF_LIGHT_KM_S

    w_isl = (packet_bits / np.asarray(snap.isl_bandwidth_bps) + snap.isl_dist * inv_c).tolist()
    w_sgl = (packet_bits / np.asarray(snap.sgl_bandwidth_bps) + snap.sgl_dist * inv_c).tolist()
    sgl_sats = [int(s) for s in snap.sgl_sats]
    sgl_index = snap._sgl_index
    adjacency = snap.grid.adjacency

    inf = math.inf
    cost = [inf] * n
    next_hop = [-1] * n
    settled = [False] * n
    cost[dst] = 0.0
    next_hop[dst] = dst
    heap: list[tuple[float, int]] = [(0.0, dst)]
    push, pop = heapq.heappush, heapq.heappop
    while heap:
        d, u = pop(heap)
        if settled[u]:
            continue
        settled[u] = True
        if u == ground:
            for k, s in enumerate(sgl_sats):
                nd = d + w_sgl[k]
                if not settled[s] and nd < cost[s]:
                    cost[s] = nd
                    next_hop[s] = u
                    push(heap, (nd, s))
            continue
        for v, e in adjacency[u]:
            nd = d + w_isl[e]
            if not settled[v] and nd < cost[v]:
                cost[v] = nd
                next_hop[v] = u
                push(heap, (nd, v))
        k = sgl_index.get(u)
        if k is not None and not settled[ground]:
            nd = d + w_sgl[k]
            if nd < cost[ground]:
                cost[ground] = nd
                next_hop[ground] = u
                push(heap, (nd, ground))
    return np.array(cost), np.array(next_hop, dtype=np.int64)


def route_from_tree(next_hop: np.ndarray, src: int, dst: int) -> list[int] | None:
    """Materialize the path src -> dst from a ``routing_tree`` next-hop array."""
    if next_hop[src] < 0:
        return None
    path = [src]
    node = src
    while node != dst:
        node = int(next_hop[node])
        path.append(node)
    return path


def export_edge_list(snap: TopologySnapshot, out: TextIO) -> int:
    """Write the snapshot as a plain-text edge list; returns the line count."""
    count = 0
    out.write("node_u\tnode_v\tkind\tdistance_km\tbandwidth_bps\n")
    for edge in snap.edges():
        out.write(
            f"{edge.u}\t{edge.v}\t{edge.kind.value}\t"
            f"{edge.distance_km:.6f}\t{edge.bandwidth_bps:.0f}\n"
        )
        count += 1
    return count


def slant_range_at_elevation(altitude_km: float, elevation_deg: float) -> float:
    """Ground-to-satellite distance at a given elevation (law of cosines)."""
    re = EARTH_RADIUS_KM
    r = re + altitude_km
    e = math.radians(elevation_deg)
    return -re * math.sin(e) + math.sqrt(r * r - (re * math.cos(e)) ** 2)
