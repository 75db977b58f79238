"""Small named graphs used throughout the tests and accepted by the CLI."""

from __future__ import annotations

from .graph import Graph, parse_graph

SOURCES = {
    "LOOP1": """
        vertex v
        edges v v 1
    """,
    "ROSE2": """
        vertex v
        edges v v 1
        edges v v 1
    """,
    "TOEPLITZ": """
        vertex v
        vertex w
        edges v v 1
        edges v w 1
    """,
    "CLOCK": """
        vertex v
        vertex w
        edges v w 1
        edges w w 1
    """,
    "E1": """
        vertex v1
        vertex w1
        edges v1 w1 1
    """,
    "E2": """
        vertex v2
        vertex m
        vertex w2
        edges v2 m 1
        edges m w2 1
    """,
    "BIFUR": """
        vertex u
        vertex v
        vertex w
        edges v u 1
        edges v w 1
    """,
    "INFB": """
        vertex v
        vertex w
        edges v w *
        edges w w 1
    """,
    "IECYC": """
        vertex v
        vertex w
        vertex u
        edges v w 1
        edges w v 1
        edges v u *
    """,
    "TWO_INTO_ONE": """
        vertex u
        vertex v
        vertex w
        edges u v 1
        edges w v 1
    """,
    "TWO_LOOP_CHAIN": """
        vertex v1
        vertex v2
        edges v1 v1 1
        edges v1 v2 1
        edges v2 v2 1
    """,
    "ROSE2_OUTSPLIT": """
        vertex a
        vertex b
        edges a a 1
        edges a b 1
        edges b a 1
        edges b b 1
    """,
    "EDGELESS": """
        vertex v
    """,
}

ALIASES = {"two-into-one": "TWO_INTO_ONE", "two-loop-chain": "TWO_LOOP_CHAIN",
           "rose2-outsplit": "ROSE2_OUTSPLIT"}


def fixture(name: str) -> Graph:
    key = ALIASES.get(name, name).upper().replace("-", "_")
    return parse_graph(SOURCES[key])


def names() -> list[str]:
    return list(SOURCES)
