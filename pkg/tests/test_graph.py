import itertools

import pytest
from hypothesis import given

from strategies import graphs
from talent.fixtures import fixture, names
from talent.graph import (OMEGA, Graph, GraphError, all_cycles, cycle_has_exit, cycles_through,
                          format_graph, is_acyclic, parse_graph, reachable)


def bfs_closure(g, start):
    adj = {v: {grp.range for grp in g.groups if grp.source == v} for v in g.vertices}
    seen = set(start)
    while True:
        new = {r for v in seen for r in adj[v]} - seen
        if not new:
            return seen
        seen |= new


def brute_cycles(g, v):
    """Group sequences forming vertex-simple closed paths at v, by enumeration."""
    n = len(g.vertices)
    found = set()
    for k in range(1, n + 1):
        for seq in itertools.product(g.groups, repeat=k):
            if seq[0].source != v or seq[-1].range != v:
                continue
            if any(a.range != b.source for a, b in zip(seq, seq[1:])):
                continue
            visited = [grp.source for grp in seq]
            if len(set(visited)) == k:
                found.add(tuple(grp.gid for grp in seq))
    return found


# -- validation -----------------------------------------------------------

def test_loop1_is_valid_and_regular():
    g = fixture("LOOP1")
    assert g.vertices == ("v",)
    assert g.is_regular("v") and not g.is_sink("v") and not g.is_infinite_emitter("v")


def test_infb_has_an_infinite_emitter():
    g = fixture("INFB")
    assert g.is_infinite_emitter("v") and not g.is_regular("v")
    assert g.is_regular("w")
    assert g.groups[0].mult == OMEGA and not g.is_row_finite()


def test_undeclared_vertex_is_rejected_with_line():
    with pytest.raises(GraphError, match="line 2: unknown vertex u"):
        parse_graph("vertex v\nedges v u 1\n")


@pytest.mark.parametrize("text, message", [
    ("vertex v\nedges v v 0", "bad multiplicity"),
    ("vertex v\nvertex v", "duplicate vertex"),
    ("vertex x", "bad vertex id"),
    ("vertex v\nedge v v 1", "cannot parse"),
    ("vertex v\nedges v v -1", "bad multiplicity"),
])
def test_malformed_graphs(text, message):
    with pytest.raises(GraphError, match=message):
        parse_graph(text)


def test_build_rejects_bad_groups():
    with pytest.raises(GraphError):
        Graph.build(["v"], [("v", "w", 1)])
    with pytest.raises(GraphError):
        Graph.build(["v"], [("v", "v", 0)])
    assert Graph.build(["v"], [("v", "v", "*")]).is_infinite_emitter("v")


def test_comments_and_blank_lines():
    g = parse_graph("# loop\n\nvertex v   # one vertex\nedges v v 2\n")
    assert g.range_mult("v") == {"v": 2}


@given(graphs(max_vertices=5))
def test_format_round_trip(g):
    assert parse_graph(format_graph(g)) == g


@pytest.mark.parametrize("name", names())
def test_fixture_round_trip(name):
    g = fixture(name)
    assert parse_graph(format_graph(g)) == g


@given(graphs(max_vertices=5, omega=0.3))
def test_vertex_kinds_partition(g):
    for v in g.vertices:
        kinds = [g.is_sink(v), g.is_infinite_emitter(v), g.is_regular(v)]
        assert kinds.count(True) == 1


# -- reachability ---------------------------------------------------------

def test_reachable_examples():
    toe, clock = fixture("TOEPLITZ"), fixture("CLOCK")
    assert reachable(toe, {"v"}) == {"v", "w"}
    assert reachable(toe, {"w"}) == {"w"}
    assert reachable(clock, {"v"}) == bfs_closure(clock, {"v"}) == {"v", "w"}


@given(graphs(max_vertices=5))
def test_reachable_matches_closure_and_is_idempotent(g):
    for v in g.vertices:
        r = reachable(g, {v})
        assert r == bfs_closure(g, {v})
        assert reachable(g, r) == r
    assert reachable(g, g.vertices[:1]) <= reachable(g, g.vertices)


@given(graphs(max_vertices=4))
def test_walks_match_path_enumeration(g):
    for v in g.vertices:
        for n in range(4):
            ends = set()
            for seq in itertools.product(g.groups, repeat=n):
                u = v
                for grp in seq:
                    if grp.source != u:
                        break
                    u = grp.range
                else:
                    ends.add(u)
            assert g.walks(v, n) == ends


# -- cycles ---------------------------------------------------------------

def test_cycles_through_examples():
    assert [c.length for c in cycles_through(fixture("LOOP1"), "v")] == [1]
    assert len(cycles_through(fixture("ROSE2"), "v")) == 2
    assert cycles_through(fixture("TOEPLITZ"), "w") == []


def test_omega_parallel_cycles_are_reported_once():
    g = parse_graph("vertex v\nedges v v *")
    (c,) = cycles_through(g, "v")
    assert c.omega_parallel
    two = parse_graph("vertex v\nedges v v 3")
    (c,) = cycles_through(two, "v")
    assert c.multiplicity == 3 and not c.omega_parallel


def test_cycle_exits():
    (loop,) = cycles_through(fixture("LOOP1"), "v")
    assert not cycle_has_exit(fixture("LOOP1"), loop)
    toe = fixture("TOEPLITZ")
    (c,) = cycles_through(toe, "v")
    assert cycle_has_exit(toe, c)
    rose = fixture("ROSE2")
    assert all(cycle_has_exit(rose, c) for c in cycles_through(rose, "v"))


def test_parallel_copy_of_a_cycle_edge_is_an_exit():
    g = parse_graph("vertex v\nvertex w\nedges v w 2\nedges w v 1")
    assert all(cycle_has_exit(g, c) for c in cycles_through(g, "v"))


@given(graphs(max_vertices=4))
def test_cycles_match_enumeration(g):
    for v in g.vertices:
        found = {c.groups for c in cycles_through(g, v)}
        assert found == brute_cycles(g, v)
        assert bool(found) == g.on_cycle(v)
    assert is_acyclic(g) == (not all_cycles(g))


@given(graphs(max_vertices=5))
def test_acyclic_graphs_have_a_source(g):
    if is_acyclic(g):
        assert g.sources


@given(graphs(max_vertices=5))
def test_min_cycle_length_is_shortest(g):
    for v in g.vertices:
        lengths = [c.length for c in cycles_through(g, v)]
        assert g.min_cycle_length(v) == (min(lengths) if lengths else None)


def test_canonical_edges_follow_group_order():
    g = parse_graph("vertex v\nvertex w\nedges v w 2\nedges v w *")
    assert g.canonical_edges("v", "w", 0, 4) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert [g.canonical_position(e) for e in [(0, 1), (1, 0), (1, 5)]] == [1, 2, 7]
    with pytest.raises(GraphError):
        parse_graph("vertex v\nvertex w\nedges v w 2").canonical_edges("v", "w", 0, 3)
