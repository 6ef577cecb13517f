"""Network/path data model: loading, validation, and incidence structure."""

import io

import numpy as np
import pytest

from queuenet import fixtures
from queuenet.net import (
    Link,
    Network,
    NetworkError,
    Node,
    ODPair,
    Path,
    PathError,
    PathSet,
    enumerate_paths,
    load_network,
    load_path_set,
    write_path_set,
)


def _net(nodes, links, ods=()):
    return Network(
        tuple(Node(n) for n in nodes),
        tuple(links),
        tuple(ods),
    )


class TestDataModel:
    def test_six_node_attributes(self):
        net = fixtures.six_node_network()
        assert len(net.nodes) == 6
        assert len(net.links) == 7
        assert len(net.od_pairs) == 2
        l4 = net.link_by_id("4")
        assert l4.tail == "5" and l4.head == "6"
        assert l4.capacity == 2400.0
        assert l4.free_flow_time == pytest.approx(0.167, abs=1e-9)
        assert net.link_by_id("1").capacity == 1800.0
        assert net.link_by_id("6").capacity == 1500.0
        assert net.link_by_id("7").free_flow_time == pytest.approx(0.133)
        assert {(od.origin, od.destination, od.demand) for od in net.od_pairs} == {
            ("1", "3", 3000.0),
            ("2", "4", 3000.0),
        }

    def test_link_validation(self):
        with pytest.raises(NetworkError, match="free_flow_time"):
            Link("a", "u", "v", free_flow_time=0.0, capacity=100.0)
        with pytest.raises(NetworkError, match="capacity"):
            Link("a", "u", "v", free_flow_time=0.1, capacity=-5.0)

    def test_time_speed_consistency(self):
        # 10 km at 50 km/h is 0.2 h; a declared 0.5 h contradicts it
        with pytest.raises(NetworkError, match="inconsistent"):
            Link("a", "u", "v", 0.5, 1000.0, length=10.0, free_speed=50.0)
        Link("a", "u", "v", 0.2, 1000.0, length=10.0, free_speed=50.0)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(NetworkError, match="duplicate node"):
            _net(["u", "u"], [])
        link = Link("a", "u", "v", 0.1, 100.0)
        with pytest.raises(NetworkError, match="duplicate link"):
            _net(["u", "v"], [link, link])

    def test_undeclared_node_rejected(self):
        with pytest.raises(NetworkError, match="undeclared"):
            _net(["u"], [Link("a", "u", "w", 0.1, 100.0)])

    def test_od_validation(self):
        with pytest.raises(NetworkError, match="demand"):
            ODPair("u", "v", -1.0)
        with pytest.raises(NetworkError, match="origin == destination"):
            ODPair("u", "u", 10.0)


class TestLoading:
    def test_load_network_csv(self):
        nodes = io.StringIO("node_id,x_coord,y_coord\nu,0,0\nv,1,0\n")
        links = io.StringIO(
            "link_id,from_node,to_node,capacity,free_flow_time\na,u,v,1800,0.25\n"
        )
        net = load_network(nodes, links)
        assert net.link_by_id("a").free_flow_time == 0.25

    def test_load_network_length_speed(self):
        nodes = io.StringIO("node_id\nu\nv\n")
        links = io.StringIO(
            "link_id,from_node,to_node,capacity,length,free_speed\na,u,v,1800,10,50\n"
        )
        net = load_network(nodes, links)
        assert net.link_by_id("a").free_flow_time == pytest.approx(0.2)

    def test_load_network_overrides(self):
        nodes = io.StringIO("node_id\nu\nv\n")
        links = io.StringIO(
            "link_id,from_node,to_node,capacity,free_flow_time,gamma\na,u,v,1800,0.25,0.2\n"
        )
        net = load_network(nodes, links)
        assert net.link_by_id("a").override_map() == {"gamma": 0.2}

    def test_load_network_bad_value(self):
        nodes = io.StringIO("node_id\nu\nv\n")
        links = io.StringIO(
            "link_id,from_node,to_node,capacity,free_flow_time\na,u,v,oops,0.25\n"
        )
        with pytest.raises(NetworkError, match="capacity"):
            load_network(nodes, links)

    def test_path_set_round_trip(self, six_node):
        buf = io.StringIO()
        write_path_set(six_node, buf)
        buf.seek(0)
        again = load_path_set(buf, six_node.network)
        assert [p.links for p in again.paths] == [p.links for p in six_node.paths]

    def test_load_path_set_comments_and_header(self, six_node):
        text = "origin,destination,links\n# comment\n1,3,1\n1,3,3;4;6\n2,4,2\n2,4,5;4;7\n"
        ps = load_path_set(io.StringIO(text), six_node.network)
        assert ps.n_paths == 4


class TestPathSet:
    def test_six_node_paths(self, six_node):
        assert six_node.n_paths == 4
        assert [p.links for p in six_node.paths] == [
            ("1",),
            ("3", "4", "6"),
            ("2",),
            ("5", "4", "7"),
        ]

    def test_incidence(self, six_node):
        inc = six_node.incidence
        assert inc.shape == (7, 4)
        assert inc[six_node.link_index("4"), 1] == 1.0
        assert inc[six_node.link_index("4"), 3] == 1.0
        assert inc[six_node.link_index("4"), 0] == 0.0
        assert inc.sum() == 8.0  # 1 + 3 + 1 + 3 links over the four paths

    def test_upstream_downstream(self, six_node):
        assert six_node.upstream("4", 1) == ("3",)
        assert six_node.downstream("4", 1) == ("6",)
        assert six_node.downstream("6", 1) == ()
        with pytest.raises(PathError):
            six_node.downstream("4", 0)

    def test_paths_through(self, six_node):
        through = six_node.paths_through[six_node.link_index("4")]
        assert through == [(1, 1), (3, 1)]

    def test_broken_chain_rejected(self, six_node):
        net = six_node.network
        with pytest.raises(PathError, match="do not chain"):
            PathSet(net, [Path(0, ("3", "6"))])
        with pytest.raises(PathError, match="origin"):
            PathSet(net, [Path(0, ("2",))])
        with pytest.raises(PathError, match="unknown link"):
            PathSet(net, [Path(0, ("zz",))])

    def test_positive_demand_needs_path(self, six_node):
        net = six_node.network
        with pytest.raises(PathError, match="no path"):
            PathSet(net, [Path(0, ("1",))])  # second OD left uncovered


class TestEnumeration:
    def test_six_node_enumeration_matches_bundle(self, six_node):
        ps = enumerate_paths(six_node.network, k=4)
        assert {p.links for p in ps.paths} == {p.links for p in six_node.paths}

    def test_deterministic_order(self, six_node):
        a = enumerate_paths(six_node.network, k=3)
        b = enumerate_paths(six_node.network, k=3)
        assert [p.links for p in a.paths] == [p.links for p in b.paths]

    def test_parallel_links_collapse_to_cheapest(self):
        links = [
            Link("slow", "u", "v", 0.5, 1000.0),
            Link("fast", "u", "v", 0.2, 1000.0),
        ]
        net = _net(["u", "v"], links, [ODPair("u", "v", 100.0)])
        ps = enumerate_paths(net, k=2)
        assert [p.links for p in ps.paths] == [("fast",)]

    def test_k_limits_path_count(self):
        net = fixtures.grid_network(size=4, n_od=3, demand=10.0)
        ps = enumerate_paths(net, k=2)
        for group in ps.od_groups:
            assert 1 <= len(group) <= 2


class TestFixtures:
    def test_grid_shape(self):
        net = fixtures.grid_network()
        assert len(net.nodes) == 225
        assert len(net.links) == 840
        assert len(net.od_pairs) == 50

    def test_two_route(self):
        net = fixtures.two_route_network()
        ps = enumerate_paths(net, k=2)
        assert ps.n_paths == 2
