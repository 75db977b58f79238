"""Hypothesis strategies built on the seeded samplers."""

import random

from hypothesis import strategies as st

from talent.sampling import random_element, random_graph

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def graphs(draw, max_vertices=4, omega=0.15):
    return random_graph(random.Random(draw(seeds)), max_vertices, omega)


@st.composite
def graph_elements(draw, max_vertices=4, omega=0.15, max_monomials=3, max_degree=2, count=1):
    rng = random.Random(draw(seeds))
    g = random_graph(rng, max_vertices, omega)
    return (g, *[random_element(rng, g, max_monomials, max_degree) for _ in range(count)])
