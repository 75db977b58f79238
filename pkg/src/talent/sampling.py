"""Random graphs and elements for property tests.

Seeds come from ``TALENT_SEED`` when set, so a failing corpus can be replayed.
"""

from __future__ import annotations

import os
import random

from .element import Element, Improper, Proper
from .graph import OMEGA, Graph
from .rewrite import DEFAULT_CAPS, SearchCaps, successors


def seed(default: int = 0) -> int:
    return int(os.environ.get("TALENT_SEED", default))


def random_graph(rng: random.Random, max_vertices: int = 5, omega: float = 0.15,
                 density: float = 0.35, max_mult: int = 2) -> Graph:
    """A random graph; each ordered pair gets a group with probability ``density``.

    A group is infinite with probability ``omega`` (zero gives a row-finite graph).
    """
    n = rng.randint(1, max_vertices)
    vs = [f"v{i}" for i in range(n)]
    edges = []
    for s in vs:
        for r in vs:
            if rng.random() < density:
                mult = OMEGA if rng.random() < omega else rng.randint(1, max_mult)
                edges.append((s, r, mult))
    return Graph.build(vs, edges)


def random_generator(rng: random.Random, g: Graph, improper: float = 0.25):
    v = rng.choice(g.vertices)
    if g.is_infinite_emitter(v) and rng.random() < improper:
        rm = g.range_mult(v)
        ranges = sorted(rm)
        while True:
            counts = {r: rng.randint(0, int(min(rm[r], 2))) for r in ranges}
            if any(counts.values()):
                return Improper.of(v, counts)
    return Proper(v)


def random_element(rng: random.Random, g: Graph, max_monomials: int = 4,
                   max_degree: int = 3, improper: float = 0.25) -> Element:
    """A nonzero element with at most ``max_monomials`` monomials (counted with multiplicity)."""
    k = rng.randint(1, max_monomials)
    counts: dict = {}
    for _ in range(k):
        m = (rng.randint(0, max_degree), random_generator(rng, g, improper))
        counts[m] = counts.get(m, 0) + 1
    return Element(counts)


def random_reduct(rng: random.Random, g: Graph, a: Element, steps: int,
                  caps: SearchCaps = DEFAULT_CAPS) -> Element:
    """Apply up to ``steps`` random rewrite steps."""
    for _ in range(steps):
        succ, _ = successors(g, a, caps, 1)
        if not succ:
            break
        a = rng.choice(succ)[1]
    return a


def equivalent_pair(rng: random.Random, g: Graph, root: Element, steps: int = 2) -> tuple[Element, Element]:
    """Two reducts of ``root``; they are equivalent by construction."""
    return random_reduct(rng, g, root, rng.randint(0, steps)), random_reduct(rng, g, root, rng.randint(0, steps))


__all__ = ["equivalent_pair", "random_element", "random_generator", "random_graph",
           "random_reduct", "seed"]
