"""Switched backhaul: star/mesh topologies and learning-switch forwarding.

Topologies have one switch per RSU plus a small set of core switches placed
at centroids of a deterministic k-means partition of the RSU positions.  In
both variants the cores form a complete graph; the star attaches each RSU to
its nearest core only, while the mesh attaches each RSU to its two nearest
cores and its two nearest RSU neighbours.

Forwarding walks a static shortest path (total link latency, ties broken by
the lexicographically smallest node-id sequence).  Switches keep per-host
rules with an idle timeout; a packet is handled without controller help only
when the rules for BOTH its destination and its source are fresh at that
switch (exact-match learning-switch semantics: traffic from a not-yet-learned
source is punted to the controller even on a known path).  Every traversed
switch also installs/refreshes the rule pointing back toward the source, so
replies find warm state.
"""

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, RoutingError
from .mobility import RsuSite

DEFAULT_LINK_LATENCY = 0.00012  # s
DEFAULT_LINK_BANDWIDTH = 1e9  # bit/s


@dataclass(frozen=True)
class Node:
    node_id: str
    kind: str  # "rsu" | "core"
    position: tuple[float, float]


@dataclass(frozen=True)
class Link:
    latency: float = DEFAULT_LINK_LATENCY
    bandwidth: float = DEFAULT_LINK_BANDWIDTH


class TopologyGraph:
    """Undirected graph of RSU and core switches."""

    def __init__(self):
        self.nodes: dict[str, Node] = {}
        self.links: dict[tuple[str, str], Link] = {}

    def add_node(self, node: Node) -> None:
        self.nodes[node.node_id] = node

    def add_link(self, a: str, b: str, link: Link = Link()) -> None:
        if a == b:
            raise ConfigurationError(f"self-loop on {a}")
        if a not in self.nodes or b not in self.nodes:
            raise ConfigurationError(f"link endpoints must be nodes: {a}, {b}")
        self.links[self._key(a, b)] = link

    @staticmethod
    def _key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a < b else (b, a)

    def has_link(self, a: str, b: str) -> bool:
        return self._key(a, b) in self.links

    def link(self, a: str, b: str) -> Link:
        return self.links[self._key(a, b)]

    def neighbors(self, node_id: str) -> list[str]:
        out = []
        for a, b in self.links:
            if a == node_id:
                out.append(b)
            elif b == node_id:
                out.append(a)
        return sorted(out)

    def is_connected(self) -> bool:
        if not self.nodes:
            return False
        seen = set()
        stack = [next(iter(sorted(self.nodes)))]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            stack.extend(m for m in self.neighbors(n) if m not in seen)
        return len(seen) == len(self.nodes)

    def edge_set(self) -> set[tuple[str, str]]:
        return set(self.links)

    def to_json_dict(self) -> dict:
        return {
            "nodes": [
                {"id": n.node_id, "kind": n.kind, "x_m": n.position[0], "y_m": n.position[1]}
                for n in sorted(self.nodes.values(), key=lambda n: n.node_id)
            ],
            "links": [
                {"a": a, "b": b, "latency_s": l.latency, "bandwidth_bps": l.bandwidth}
                for (a, b), l in sorted(self.links.items())
            ],
        }


def _kmeans_cores(rsus: list[RsuSite], n_core: int) -> list[tuple[float, float]]:
    """Deterministic Lloyd iteration seeded from the id-sorted RSU list."""
    ordered = sorted(rsus, key=lambda r: r.rsu_id)
    pts = np.array([r.position for r in ordered], dtype=float)
    n = len(ordered)
    centers = pts[[(i * n) // n_core for i in range(n_core)]].copy()
    assign = np.full(n, -1)
    for _ in range(100):
        d2 = ((pts[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)  # ties resolve to the lowest cluster index
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for k in range(n_core):
            members = pts[assign == k]
            if len(members):
                centers[k] = members.mean(axis=0)
    return [tuple(c) for c in centers]


def build_topology(rsus: list[RsuSite], n_core: int, kind: str) -> TopologyGraph:
    """Build the star or mesh backhaul over the given RSU sites."""
    if kind not in ("star", "mesh"):
        raise ConfigurationError(f"unknown topology kind {kind!r}")
    if n_core < 1:
        raise ConfigurationError("need at least one core switch")
    if not rsus:
        raise ConfigurationError("need at least one RSU")
    if n_core > len(rsus):
        raise ConfigurationError(f"n_core={n_core} exceeds RSU count {len(rsus)}")
    if kind == "mesh" and (len(rsus) < 3 or n_core < 2):
        raise ConfigurationError("mesh needs at least 3 RSUs and 2 cores")

    graph = TopologyGraph()
    for site in rsus:
        graph.add_node(Node(site.rsu_id, "rsu", site.position))
    core_ids = [f"core{i:02d}" for i in range(n_core)]
    for cid, pos in zip(core_ids, _kmeans_cores(rsus, n_core)):
        graph.add_node(Node(cid, "core", pos))

    for i in range(n_core):
        for j in range(i + 1, n_core):
            graph.add_link(core_ids[i], core_ids[j])

    want_cores = 1 if kind == "star" else 2
    for site in rsus:
        for cid in _nearest(graph, site.rsu_id, core_ids, want_cores):
            graph.add_link(site.rsu_id, cid)
    if kind == "mesh":
        rsu_ids = [r.rsu_id for r in rsus]
        for site in rsus:
            others = [r for r in rsu_ids if r != site.rsu_id]
            for rid in _nearest(graph, site.rsu_id, others, 2):
                graph.add_link(site.rsu_id, rid)
    return graph


def _nearest(graph: TopologyGraph, from_id: str, candidates: list[str], k: int) -> list[str]:
    fx, fy = graph.nodes[from_id].position
    ranked = sorted(
        candidates,
        key=lambda c: (math.hypot(graph.nodes[c].position[0] - fx, graph.nodes[c].position[1] - fy), c),
    )
    return ranked[:k]


def shortest_path(graph: TopologyGraph, src: str, dst: str) -> list[str]:
    """Minimum total-latency path; ties by lexicographic node-id sequence."""
    if src not in graph.nodes or dst not in graph.nodes:
        raise RoutingError(f"unknown endpoint {src!r} or {dst!r}")
    if src == dst:
        return [src]
    heap: list[tuple[float, tuple[str, ...]]] = [(0.0, (src,))]
    settled: set[str] = set()
    while heap:
        dist, path = heapq.heappop(heap)
        node = path[-1]
        if node in settled:
            continue
        settled.add(node)
        if node == dst:
            return list(path)
        for nb in graph.neighbors(node):
            if nb not in settled:
                heapq.heappush(heap, (dist + graph.link(node, nb).latency, path + (nb,)))
    raise RoutingError(f"no path from {src} to {dst}")


@dataclass
class FlowRule:
    switch_id: str
    match_dst: str
    out_port: str
    last_used: float


class RuleTable:
    """Per-switch forwarding rules keyed by (switch_id, destination host)."""

    def __init__(self):
        self.rules: dict[tuple[str, str], FlowRule] = {}

    def fresh(self, switch_id: str, host: str, t_now: float, idle_timeout: float) -> bool:
        rule = self.rules.get((switch_id, host))
        return rule is not None and t_now - rule.last_used <= idle_timeout

    def install(self, switch_id: str, host: str, out_port: str, t_now: float) -> None:
        key = (switch_id, host)
        rule = self.rules.get(key)
        if rule is None:
            self.rules[key] = FlowRule(switch_id, host, out_port, t_now)
        else:
            rule.out_port = out_port
            rule.last_used = t_now

    def size_at(self, switch_id: str) -> int:
        return sum(1 for sw, _ in self.rules if sw == switch_id)


@dataclass
class ControllerModel:
    """Abstract learning-switch controller: per-packet-in latency and rule aging."""

    service_latency: float = 0.0005
    rule_idle_timeout: float = 10.0
    jitter: float = 0.0  # half-width of the uniform spread around service_latency

    def __post_init__(self):
        if self.service_latency < 0 or self.jitter < 0:
            raise ConfigurationError("controller latencies must be >= 0")
        if self.rule_idle_timeout <= 0:
            raise ConfigurationError("rule_idle_timeout must be > 0")

    def draw_latency(self, rng: np.random.Generator | None) -> float:
        if self.jitter <= 0:
            return self.service_latency
        if rng is None:
            raise ConfigurationError("controller jitter needs an rng")
        return max(0.0, self.service_latency + self.jitter * rng.uniform(-1.0, 1.0))


@dataclass(frozen=True)
class Packet:
    src_host: str
    dst_host: str
    size_bits: int


@dataclass
class SwitchCaps:
    """Optional per-switch packets-per-second limit; None means unlimited."""

    max_pps: float | None = None
    counts: dict[tuple[str, int], int] = field(default_factory=dict)

    def admit(self, switch_id: str, t: float) -> bool:
        if self.max_pps is None:
            return True
        key = (switch_id, int(t))
        n = self.counts.get(key, 0) + 1
        self.counts[key] = n
        return n <= self.max_pps


@dataclass
class ForwardResult:
    arrival_time: float | None
    hops: list[str]
    controller_detours: int
    dropped_at: str | None = None

    @property
    def dropped(self) -> bool:
        return self.dropped_at is not None


def forward(
    packet: Packet,
    ingress: str,
    dst_switch: str,
    graph: TopologyGraph,
    tables: RuleTable,
    controller: ControllerModel,
    t_now: float,
    rng: np.random.Generator | None = None,
    path: list[str] | None = None,
    caps: SwitchCaps | None = None,
) -> ForwardResult:
    """Carry one packet from the ingress switch to the destination's switch.

    ``path`` pins an explicit switch sequence (used for replies that retrace
    the request); otherwise the static shortest path is used.  Returns the
    arrival time at the destination switch, the switches traversed, and the
    number of controller detours taken.
    """
    if path is None:
        path = shortest_path(graph, ingress, dst_switch)
    elif path[0] != ingress or path[-1] != dst_switch:
        raise RoutingError("pinned path does not match endpoints")
    t = t_now
    detours = 0
    hops: list[str] = []
    for idx, sw in enumerate(path):
        hops.append(sw)
        if caps is not None and not caps.admit(sw, t):
            return ForwardResult(None, hops, detours, dropped_at=sw)
        in_port = path[idx - 1] if idx > 0 else "host"
        out_port = path[idx + 1] if idx + 1 < len(path) else "host"
        if tables.fresh(sw, packet.dst_host, t, controller.rule_idle_timeout) and tables.fresh(
            sw, packet.src_host, t, controller.rule_idle_timeout
        ):
            tables.install(sw, packet.dst_host, out_port, t)
            tables.install(sw, packet.src_host, in_port, t)
        else:
            t += controller.draw_latency(rng)
            detours += 1
            tables.install(sw, packet.dst_host, out_port, t)
            tables.install(sw, packet.src_host, in_port, t)
        if idx + 1 < len(path):
            link = graph.link(sw, path[idx + 1])
            t += link.latency + packet.size_bits / link.bandwidth
    return ForwardResult(t, hops, detours)
