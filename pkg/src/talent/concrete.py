"""Rewriting with improper vertices indexed by actual finite edge sets.

The main representation identifies ``q_Z`` and ``q_Z'`` whenever ``Z`` and
``Z'`` have the same number of edges into each range.  Here ``Z`` is kept as
a set of concrete edges, so that identification can be tested: the two sides
must reach a common reduct.  Infinite groups are cut to a finite window of
edge indices.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

from .element import Element, Proper, canonical_improper
from .graph import Edge, Graph


@dataclass(frozen=True, order=True)
class EdgeSetImproper:
    vertex: str
    edges: frozenset

    def __str__(self) -> str:
        return f"q({self.vertex}){sorted(self.edges)}"


# a concrete element: sorted tuple of ((degree, generator), count)
ConcreteElement = tuple


def _key(m) -> tuple:
    d, g = m
    if isinstance(g, Proper):
        return (d, 0, g.vertex, ())
    return (d, 1, g.vertex, tuple(sorted(g.edges)))


def make(counts: Counter) -> ConcreteElement:
    return tuple(sorted(((m, c) for m, c in counts.items() if c), key=lambda mc: _key(mc[0])))


def window_edges(g: Graph, v: str, window: int) -> list[Edge]:
    out = []
    for grp in g.out_groups(v):
        out += [(grp.gid, i) for i in range(int(min(grp.mult, window)))]
    return out


def steps(g: Graph, a: ConcreteElement, window: int, max_new: int):
    """All one-step successors, adding at most ``max_new`` edges per step."""
    for m, _ in a:
        d, gen = m
        v = gen.vertex
        if isinstance(gen, Proper):
            if g.is_sink(v):
                continue
            if g.is_regular(v):
                new = [((d + 1, Proper(grp.range)), int(grp.mult)) for grp in g.out_groups(v)]
                yield _replace(a, m, None, new)
                continue
            old: frozenset = frozenset()
        else:
            old = gen.edges
        free = [e for e in window_edges(g, v, window) if e not in old]
        for k in range(1, max_new + 1):
            for extra in itertools.combinations(free, k):
                q = EdgeSetImproper(v, old | frozenset(extra))
                new = [((d + 1, Proper(g.edge_range(e))), 1) for e in extra]
                yield _replace(a, m, (d, q), new)


def _replace(a: ConcreteElement, m, keep, new) -> ConcreteElement:
    c = Counter(dict(a))
    c[m] -= 1
    if keep is not None:
        c[keep] += 1
    for mm, k in new:
        c[mm] += k
    return make(c)


def common_reduct(g: Graph, a: ConcreteElement, b: ConcreteElement, depth: int = 4,
                  window: int = 6, max_new: int = 3) -> ConcreteElement | None:
    """Breadth-first search from both sides for a shared reduct within ``depth`` steps each."""
    seen = [{a: 0}, {b: 0}]
    frontier = [[a], [b]]
    if a == b:
        return a
    for _ in range(depth):
        for side in (0, 1):
            nxt = []
            for e in frontier[side]:
                for f in steps(g, e, window, max_new):
                    if f in seen[1 - side]:
                        return f
                    if f not in seen[side]:
                        seen[side][f] = 1
                        nxt.append(f)
            frontier[side] = nxt
    return None


def improper_element(v: str, edges) -> ConcreteElement:
    return make(Counter({(0, EdgeSetImproper(v, frozenset(edges))): 1}))


def to_canonical(g: Graph, a: ConcreteElement) -> Element:
    """Forget edge identities, keeping range counts."""
    counts: Counter = Counter()
    for (d, gen), c in a:
        h = gen if isinstance(gen, Proper) else canonical_improper(g, gen.vertex, gen.edges)
        counts[(d, h)] += c
    return Element(counts)


def same_count_pairs(g: Graph, v: str, max_count: int = 3, window: int = 6):
    """Pairs ``Z != Z'`` of edge sets out of ``v`` with equal range counts, each count at most ``max_count``."""
    edges = window_edges(g, v, window)
    by_counts: dict = {}
    for k in range(1, len(edges) + 1):
        for zs in itertools.combinations(edges, k):
            cnt = Counter(g.edge_range(e) for e in zs)
            if max(cnt.values()) <= max_count:
                by_counts.setdefault(tuple(sorted(cnt.items())), []).append(frozenset(zs))
    for group in by_counts.values():
        yield from itertools.combinations(group, 2)


__all__ = ["EdgeSetImproper", "common_reduct", "improper_element", "make", "same_count_pairs",
           "steps", "to_canonical", "window_edges"]
