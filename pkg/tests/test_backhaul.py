import itertools

import numpy as np
import pytest

from beaconsim.backhaul import (
    ControllerModel,
    Link,
    Node,
    Packet,
    RuleTable,
    SwitchCaps,
    TopologyGraph,
    build_topology,
    forward,
    shortest_path,
)
from beaconsim.errors import ConfigurationError, RoutingError
from beaconsim.mobility import RsuSite


def make_rsus(n, seed=0, span=1000.0):
    rng = np.random.default_rng(seed)
    return [
        RsuSite(f"rsu{i:02d}", (float(x), float(y)))
        for i, (x, y) in enumerate(rng.uniform(0.0, span, size=(n, 2)))
    ]


def total_latency(graph, path):
    return sum(graph.link(path[i], path[i + 1]).latency for i in range(len(path) - 1))


def test_star_20_rsus_4_cores_edge_count():
    graph = build_topology(make_rsus(20), 4, "star")
    assert len(graph.nodes) == 24
    # complete core graph (6) plus one uplink per RSU (20)
    assert len(graph.links) == 26
    assert graph.is_connected()


def test_mesh_edge_count_matches_independent_neighbor_scan():
    rsus = make_rsus(20)
    graph = build_topology(rsus, 4, "mesh")
    assert len(graph.nodes) == 24
    core_pos = {n.node_id: n.position for n in graph.nodes.values() if n.kind == "core"}
    expected = set()
    cores = sorted(core_pos)
    for i in range(len(cores)):
        for j in range(i + 1, len(cores)):
            expected.add(tuple(sorted((cores[i], cores[j]))))

    def dist(p, q):
        return ((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2) ** 0.5

    for site in rsus:
        ranked = sorted(cores, key=lambda c: (dist(site.position, core_pos[c]), c))
        for c in ranked[:2]:
            expected.add(tuple(sorted((site.rsu_id, c))))
        others = [r for r in rsus if r.rsu_id != site.rsu_id]
        ranked_r = sorted(others, key=lambda r: (dist(site.position, r.position), r.rsu_id))
        for r in ranked_r[:2]:
            expected.add(tuple(sorted((site.rsu_id, r.rsu_id))))
    assert graph.edge_set() == expected
    rsu_rsu = [e for e in expected if e[0].startswith("rsu") and e[1].startswith("rsu")]
    assert 20 <= len(rsu_rsu) <= 40


def test_minimal_star():
    graph = build_topology(make_rsus(2), 1, "star")
    assert len(graph.nodes) == 3
    assert len(graph.links) == 2
    assert graph.is_connected()


def test_build_topology_configuration_errors():
    with pytest.raises(ConfigurationError):
        build_topology(make_rsus(3), 5, "star")  # more cores than RSUs
    with pytest.raises(ConfigurationError):
        build_topology(make_rsus(2), 2, "mesh")  # mesh needs >= 3 RSUs
    with pytest.raises(ConfigurationError):
        build_topology(make_rsus(5), 1, "mesh")  # mesh needs >= 2 cores
    with pytest.raises(ConfigurationError):
        build_topology([], 1, "star")


def test_star_is_edge_subgraph_of_mesh():
    rsus = make_rsus(12, seed=3)
    star = build_topology(rsus, 3, "star")
    mesh = build_topology(rsus, 3, "mesh")
    assert star.edge_set() <= mesh.edge_set()


def test_shortest_path_matches_exhaustive_enumeration():
    rng = np.random.default_rng(17)
    for trial in range(30):
        n = int(rng.integers(3, 9))
        graph = TopologyGraph()
        ids = [f"n{i}" for i in range(n)]
        for i, node_id in enumerate(ids):
            graph.add_node(Node(node_id, "core", (float(i), 0.0)))
        for i in range(n):
            for j in range(i + 1, n):
                if rng.uniform() < 0.5:
                    graph.add_link(ids[i], ids[j], Link(latency=float(rng.uniform(0.1, 1.0))))
        for i in range(1, n):  # keep it connected
            if not any(graph.has_link(ids[i], ids[j]) for j in range(i)):
                graph.add_link(ids[i], ids[i - 1], Link(latency=0.5))
        src, dst = ids[0], ids[n - 1]
        got = shortest_path(graph, src, dst)
        best = None
        for k in range(1, n + 1):
            for mid in itertools.permutations([x for x in ids if x not in (src, dst)], k - 1):
                path = [src, *mid, dst]
                if all(graph.has_link(path[i], path[i + 1]) for i in range(len(path) - 1)):
                    key = (total_latency(graph, path), tuple(path))
                    if best is None or key < best:
                        best = key
        assert best is not None
        assert (total_latency(graph, got), tuple(got)) == best


def line3():
    """Three switches in a line; hosts h_src at s0, h_dst at s2."""
    graph = TopologyGraph()
    for i in range(3):
        graph.add_node(Node(f"s{i}", "core", (float(i), 0.0)))
    graph.add_link("s0", "s1")
    graph.add_link("s1", "s2")
    return graph


def test_cold_path_detours_once_per_switch():
    graph = line3()
    tables = RuleTable()
    ctrl = ControllerModel()
    pkt = Packet("h_src", "h_dst", 2400)
    res = forward(pkt, "s0", "s2", graph, tables, ctrl, t_now=0.0)
    assert res.controller_detours == 3
    assert res.hops == ["s0", "s1", "s2"]
    assert not res.dropped


def test_warm_path_has_zero_detours_and_pure_link_delay():
    graph = line3()
    tables = RuleTable()
    ctrl = ControllerModel()
    pkt = Packet("h_src", "h_dst", 2400)
    forward(pkt, "s0", "s2", graph, tables, ctrl, t_now=0.0)
    res = forward(pkt, "s0", "s2", graph, tables, ctrl, t_now=0.01)
    assert res.controller_detours == 0
    per_hop = Link().latency + 2400 / Link().bandwidth
    assert res.arrival_time == pytest.approx(0.01 + 2 * per_hop, abs=1e-15)


def test_rules_purge_after_idle_timeout():
    graph = line3()
    tables = RuleTable()
    ctrl = ControllerModel(rule_idle_timeout=10.0)
    pkt = Packet("h_src", "h_dst", 2400)
    forward(pkt, "s0", "s2", graph, tables, ctrl, t_now=0.0)
    res = forward(pkt, "s0", "s2", graph, tables, ctrl, t_now=10.0 + 0.5)
    assert res.controller_detours == 3


def test_back_to_back_packets_detour_only_on_first():
    graph = line3()
    tables = RuleTable()
    ctrl = ControllerModel()
    pkt = Packet("h_src", "h_dst", 2400)
    detours = [
        forward(pkt, "s0", "s2", graph, tables, ctrl, t_now=0.1 * k).controller_detours
        for k in range(6)
    ]
    assert detours == [3, 0, 0, 0, 0, 0]


def test_reply_finds_rules_warm_after_request():
    graph = line3()
    tables = RuleTable()
    ctrl = ControllerModel()
    forward(Packet("h_src", "h_dst", 2400), "s0", "s2", graph, tables, ctrl, t_now=0.0)
    res = forward(
        Packet("h_dst", "h_src", 2400), "s2", "s0", graph, tables, ctrl,
        t_now=0.02, path=["s2", "s1", "s0"],
    )
    assert res.controller_detours == 0


def test_fresh_destination_but_unknown_source_still_detours():
    # Exact-match learning: a switch that has not seen the source punts to the
    # controller even when the destination rule is warm.
    graph = line3()
    tables = RuleTable()
    ctrl = ControllerModel()
    forward(Packet("h_a", "h_dst", 2400), "s0", "s2", graph, tables, ctrl, t_now=0.0)
    res = forward(Packet("h_b", "h_dst", 2400), "s0", "s2", graph, tables, ctrl, t_now=0.01)
    assert res.controller_detours == 3


def test_rule_table_size_bounded_by_hosts_seen():
    graph = line3()
    tables = RuleTable()
    ctrl = ControllerModel()
    hosts = [f"h{i}" for i in range(5)]
    for i, h in enumerate(hosts):
        forward(Packet(h, "h_dst", 2400), "s0", "s2", graph, tables, ctrl, t_now=float(i))
    for sw in ("s0", "s1", "s2"):
        assert tables.size_at(sw) <= len(hosts) + 1  # sources plus the one destination


def test_arrival_strictly_after_departure():
    graph = line3()
    tables = RuleTable()
    res = forward(Packet("a", "b", 2400), "s0", "s2", graph, tables, ControllerModel(), 5.0)
    assert res.arrival_time > 5.0


def test_switch_cap_drops_excess_packets():
    graph = line3()
    tables = RuleTable()
    ctrl = ControllerModel()
    caps = SwitchCaps(max_pps=2)
    results = [
        forward(Packet("a", "b", 2400), "s0", "s2", graph, tables, ctrl, 0.1 * k, caps=caps)
        for k in range(4)
    ]
    assert [r.dropped for r in results] == [False, False, True, True]
    assert results[2].dropped_at == "s0"
    later = forward(Packet("a", "b", 2400), "s0", "s2", graph, tables, ctrl, 1.5, caps=caps)
    assert not later.dropped  # counter resets each second


def test_forward_rejects_mismatched_pinned_path():
    graph = line3()
    with pytest.raises(RoutingError):
        forward(
            Packet("a", "b", 2400), "s0", "s2", graph, RuleTable(), ControllerModel(), 0.0,
            path=["s1", "s2"],
        )


def test_topology_json_export_shape():
    graph = build_topology(make_rsus(4, seed=5), 2, "star")
    doc = graph.to_json_dict()
    assert {n["id"] for n in doc["nodes"]} == set(graph.nodes)
    assert all(set(e) == {"a", "b", "latency_s", "bandwidth_bps"} for e in doc["links"])
    assert [n["id"] for n in doc["nodes"]] == sorted(n["id"] for n in doc["nodes"])
