import itertools
from collections import Counter

import pytest

from talent.concrete import (common_reduct, improper_element, make, same_count_pairs, steps,
                             to_canonical, window_edges)
from talent.connectivity import decide_arrow
from talent.element import Improper, Proper, parse_element
from talent.fixtures import fixture
from talent.rewrite import SearchCaps, one_step_successors


@pytest.mark.parametrize("name, v", [("INFB", "v"), ("IECYC", "v")])
def test_same_counts_meet(name, v):
    g = fixture(name)
    pairs = list(itertools.islice(same_count_pairs(g, v, max_count=2, window=4), 12))
    assert pairs
    for z1, z2 in pairs:
        a, b = improper_element(v, z1), improper_element(v, z2)
        assert to_canonical(g, a) == to_canonical(g, b)
        common = common_reduct(g, a, b, depth=3, window=4, max_new=2)
        assert common is not None
        c = to_canonical(g, common)
        assert decide_arrow(g, to_canonical(g, a), c).is_yes


def test_different_counts_are_not_paired():
    g = fixture("IECYC")
    for z1, z2 in same_count_pairs(g, "v", max_count=2, window=3):
        assert z1 != z2
        assert sorted(g.edge_range(e) for e in z1) == sorted(g.edge_range(e) for e in z2)


def test_to_canonical():
    g = fixture("IECYC")
    a = improper_element("v", [(2, 1), (2, 3), (0, 0)])
    assert to_canonical(g, a) == parse_element(g, "q(v){u:2,w:1}")
    assert to_canonical(g, improper_element("v", [(2, 5)])).monomials()[0][1] == Improper.of("v", {"u": 1})


def test_window_edges():
    g = fixture("INFB")
    assert window_edges(g, "v", 3) == [(0, 0), (0, 1), (0, 2)]
    assert window_edges(g, "w", 3) == [(1, 0)]


def _concrete_starts(g, v):
    yield make(Counter({(0, Proper(v)): 1}))
    if not g.is_regular(v):
        yield improper_element(v, window_edges(g, v, 1)[:1])


@pytest.mark.parametrize("name, v", [("INFB", "v"), ("IECYC", "v"), ("IECYC", "w"), ("INFB", "w")])
def test_concrete_steps_forget_to_canonical_steps(name, v):
    g = fixture(name)
    for concrete in _concrete_starts(g, v):
        a = to_canonical(g, concrete)
        canon = {b for _, b in one_step_successors(g, a, SearchCaps(max_new_count=2))}
        images = {to_canonical(g, b) for b in steps(g, concrete, window=4, max_new=2)}
        assert images and images <= canon
