import random

import pytest
from hypothesis import given

from strategies import graph_elements, seeds
from talent.connectivity import (GenPath, PathSystem, connected_by, connects, decide_arrow,
                                 decide_arrow_a1, decide_contains, decide_within, on_cycle,
                                 prefix_audit, realize_from_supports, supports_connect,
                                 supports_connect_a1, used_part, validate_path_system)
from talent.element import Element, Improper, Proper, parse_element, shift, support
from talent.fixtures import fixture
from talent.graph import parse_graph
from talent.rewrite import SearchCaps, explore, replay
from talent.sampling import random_element, random_generator, random_graph

E1 = fixture("E1")
TOE = fixture("TOEPLITZ")
INFB = fixture("INFB")
IECYC = fixture("IECYC")
REDUCT_CAPS = SearchCaps(max_depth=3, max_monomials=8, max_new_count=2, max_states=60)


def P(g, text):
    return parse_element(g, text)


def Q(v, **counts):
    return Improper.of(v, counts)


# -- generator paths --------------------------------------------------------------

def test_connects_examples():
    (p,) = connects(E1, Proper("v1"), Proper("w1"), 1)
    assert p.case == "i" and p.length == 1
    assert connects(E1, Proper("v1"), Proper("w1"), 0) == []
    paths = connects(IECYC, Q("v", u=1), Proper("v"), 2)
    assert paths and all(p.case == "iii" and p.edges[0][0] == 0 for p in paths)


def test_connects_cases_for_improper_targets():
    assert [p.case for p in connects(IECYC, Proper("w"), Q("v", u=3), 1)] == ["ii"]
    assert [p.case for p in connects(IECYC, Q("v", u=1), Q("v", u=2), 0)] == ["iv"]
    assert connects(IECYC, Q("v", u=2), Q("v", u=1), 0) == []
    assert connects(IECYC, Q("v", w=1), Q("v", u=1), 2) == []
    assert connects(TOE, Proper("v"), Q("v", w=1), 0) == []


def test_parallel_paths_are_collapsed():
    g = fixture("ROSE2")
    paths = connects(g, Proper("v"), Proper("v"), 2)
    assert len(paths) == 4
    (p,) = connects(INFB, Proper("v"), Proper("w"), 1)
    assert p.multiplicity == float("inf")


def test_z_edges_are_excluded_from_the_first_step():
    g = fixture("INFB")
    q = Q("v", w=2)
    assert not connected_by(g, q, Proper("w"), ((0, 0),))
    assert connected_by(g, q, Proper("w"), ((0, 2),))


def test_on_cycle_examples():
    assert on_cycle(fixture("LOOP1"), Proper("v"))
    assert not on_cycle(INFB, Proper("v")) and on_cycle(INFB, Proper("w"))
    assert on_cycle(IECYC, Q("v", u=1))
    assert not on_cycle(IECYC, Q("v", w=1))


# -- deciding arrows -----------------------------------------------------------

def test_decide_arrow_examples():
    two, bif = fixture("TWO_INTO_ONE"), fixture("BIFUR")
    v = decide_arrow(two, P(two, "u + w"), P(two, "2 x v"))
    assert v.is_yes and sorted(v.witness.partition) == [(0,), (1,)]
    assert decide_arrow(two, P(two, "u"), P(two, "x^2 v")).is_no
    v = decide_arrow(bif, P(bif, "v"), P(bif, "x u + x w"))
    assert v.is_yes and v.witness.partition == ((0, 1),)


def test_decide_arrow_needs_nonzero_inputs():
    with pytest.raises(ValueError):
        decide_arrow(TOE, Element(), P(TOE, "v"))


def test_budget_exhaustion_is_unknown():
    g = fixture("ROSE2")
    assert decide_arrow(g, P(g, "v"), P(g, "8 x^3 v"), budget=1).is_unknown
    assert decide_arrow(g, P(g, "v"), P(g, "8 x^3 v")).is_yes


def test_improper_arrows():
    assert decide_arrow(INFB, P(INFB, "v"), P(INFB, "q(v){w:2} + 2 x w")).is_yes
    assert decide_arrow(INFB, P(INFB, "v"), P(INFB, "q(v){w:2} + x w")).is_no
    assert decide_arrow(IECYC, P(IECYC, "q(v){u:1}"), P(IECYC, "q(v){u:1,w:1} + x^2 v")).is_yes


def _system(g, a, b, paths):
    A, B = P(g, a), P(g, b)
    src, tgt = A.monomials()[0][1], B.monomials()
    return PathSystem(A, B, (tuple(range(len(tgt))),),
                      {(0, j): GenPath(src, tgt[j][1], e) for j, e in enumerate(paths)})


@pytest.mark.parametrize("graph, a, b, paths, literal", [
    (TOE, "v", "x w + x^2 v", [((1, 0),), ((0, 0), (0, 0))], {"anywhere"}),
    (TOE, "v", "v + x v + x w", [(), ((0, 0),), ((1, 0),)], {"anywhere", "extension"}),
    (INFB, "v", "q(v){w:2} + x w", [(), ((0, 0),)], {"anywhere", "extension"}),
])
def test_literal_prefix_readings_accept_false_arrows(graph, a, b, paths, literal):
    ps = _system(graph, a, b, paths)
    assert decide_arrow(graph, P(graph, a), P(graph, b)).is_no
    assert not validate_path_system(graph, ps, "tree")[0]
    for reading in ("anywhere", "extension"):
        assert validate_path_system(graph, ps, reading)[0] == (reading in literal)


@given(graph_elements(max_vertices=4, omega=0.3, max_monomials=3, max_degree=2, count=2))
def test_arrow_witnesses_are_valid(data):
    g, a, b = data
    v = decide_arrow(g, a, b)
    if not v.is_yes:
        return
    ps = v.witness
    assert replay(g, a, ps.chain) == b
    assert validate_path_system(g, ps, "tree") == (True, "ok")
    src, tgt = a.monomials(), b.monomials()
    for (i, j), p in ps.paths.items():
        assert src[i][0] <= tgt[j][0] and p.length == tgt[j][0] - src[i][0]
    assert len(prefix_audit(g, ps)) >= len(src)


@given(seeds)
def test_reducts_are_recognised(s):
    rng = random.Random(s)
    g = random_graph(rng, 4, omega=0.3)
    a = random_element(rng, g, 2, 2)
    states = explore(g, a, REDUCT_CAPS).states
    for e in rng.sample(states, min(len(states), 8)):
        assert decide_arrow(g, a, e).is_yes
        part = Element(rng.sample(e.monomials(), rng.randint(1, len(e))))
        # Unknown is a budget report; only a No would be wrong
        v = decide_contains(g, a, part)
        assert not v.is_no
        if v.is_yes:
            assert replay(g, a, v.witness.chain) == part + v.witness.rest
        w = decide_within(g, a, e + part)
        assert not w.is_no
        if w.is_yes:
            assert (e + part).contains(used_part(w.witness))


@given(seeds)
def test_connects_matches_contains(s):
    rng = random.Random(s)
    g = random_graph(rng, 4, omega=0.3)
    src, dst = random_generator(rng, g, 0.5), random_generator(rng, g, 0.5)
    for m in range(4):
        found = bool(connects(g, src, dst, m))
        assert found == decide_contains(g, Element.mono(src), Element.mono(dst, m)).is_yes


def test_strict_within():
    g = fixture("LOOP1")
    assert decide_within(g, P(g, "v"), P(g, "x v")).is_yes
    assert decide_within(g, P(g, "v"), P(g, "x v"), strict=True).is_no
    assert decide_within(g, P(g, "v"), P(g, "x v + v"), strict=True).is_yes


# -- supports ---------------------------------------------------------------------

def test_supports_examples():
    assert supports_connect(E1, {Proper("v1")}, {Proper("w1")}).is_yes
    assert supports_connect(E1, {Proper("w1")}, {Proper("v1")}).is_no
    with pytest.raises(ValueError):
        supports_connect(E1, set(), {Proper("w1")})


def test_support_trees_split_targets_that_cycle():
    # v0 and v1 both wanted below v1 on the cycle v1 -> v0 -> v1
    g = parse_graph("vertex v0\nvertex v1\nvertex v3\n"
                    "edges v0 v1 2\nedges v0 v3 2\nedges v1 v0 1\nedges v3 v1 2")
    a = P(g, "v1 + x^2 v3")
    v = supports_connect(g, support(a), {Proper("v0"), Proper("v1")})
    assert v.is_yes
    c = realize_from_supports(g, a, v.witness)
    assert support(c) <= {Proper("v0"), Proper("v1")} and decide_arrow(g, a, c).is_yes


@pytest.mark.parametrize("name, a, H, want", [
    ("E1", "v1", {"w1"}, "x w1"),
    ("TOEPLITZ", "v", {"v", "w"}, "x v + x w"),
    ("CLOCK", "v", {"w"}, "x w"),
])
def test_realize_from_supports(name, a, H, want):
    g = fixture(name)
    A = P(g, a)
    v = supports_connect(g, support(A), {Proper(h) for h in H})
    assert v.is_yes
    c = realize_from_supports(g, A, v.witness)
    assert c == P(g, want)
    assert decide_arrow(g, A, c).is_yes


@given(graph_elements(max_vertices=4, omega=0.3, max_monomials=3, max_degree=2, count=2))
def test_arrows_connect_supports(data):
    g, a, b = data
    if not decide_arrow(g, a, b).is_yes:
        return
    v = supports_connect(g, support(a), support(b))
    assert v.is_yes
    c = realize_from_supports(g, a, v.witness)
    assert not c.is_zero and support(c) <= support(b)
    assert decide_arrow(g, a, c).is_yes


@given(graph_elements(max_vertices=4, omega=0.0, max_monomials=3, max_degree=2, count=2))
def test_a1_variants_agree_on_row_finite_graphs(data):
    g, a, b = data
    if any(not g.is_regular(h.vertex) for h in support(a)):
        with pytest.raises(ValueError):
            decide_arrow_a1(g, a, b)
        return
    assert decide_arrow_a1(g, a, b).status == decide_arrow(g, a, b).status
    assert supports_connect_a1(g, support(a), support(b)).status == \
        supports_connect(g, support(a), support(b)).status


def test_a1_only_ignores_infinite_emitters():
    g = fixture("IECYC")
    assert decide_arrow(g, P(g, "w"), P(g, "x q(v){u:1} + x^2 u")).is_yes
    assert decide_arrow_a1(g, P(g, "w"), P(g, "x q(v){u:1} + x^2 u")).is_no


def test_shifted_arrows():
    g = fixture("TOEPLITZ")
    a, b = P(g, "v + w"), P(g, "x v + x w + w")
    for n in (-2, 0, 3):
        assert decide_arrow(g, shift(a, n), shift(b, n)).is_yes
