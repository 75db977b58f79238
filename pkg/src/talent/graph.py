"""Finite directed multigraphs stored as groups of parallel edges.

A group ``(src, rng, mult)`` stands for ``mult`` parallel edges from ``src``
to ``rng``; ``mult`` is a positive integer or :data:`OMEGA` (countably many).
Concrete edges are addressed as ``(gid, index)``.

>>> g = parse_graph("vertex v\\nvertex w\\nedges v v 1\\nedges v w 1")
>>> g.is_regular("v"), g.is_sink("w")
(True, True)
>>> [c.groups for c in cycles_through(g, "v")]
[(0,)]
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

OMEGA = math.inf

VERTEX_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
RESERVED = frozenset({"x"})

Edge = tuple[int, int]


class GraphError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class EdgeGroup:
    gid: int
    source: str
    range: str
    mult: float  # int or OMEGA

    @property
    def infinite(self) -> bool:
        return self.mult == OMEGA

    def edges(self) -> Iterator[Edge]:
        """Concrete edges of the group (unbounded for an infinite group)."""
        i = 0
        while i < self.mult:
            yield (self.gid, i)
            i += 1


def _mult_text(m: float) -> str:
    return "*" if m == OMEGA else str(int(m))


@dataclass(frozen=True)
class Graph:
    vertices: tuple[str, ...]
    groups: tuple[EdgeGroup, ...]
    _memo: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @classmethod
    def build(cls, vertices: Iterable[str], edges: Iterable[tuple]) -> Graph:
        """Build and validate a graph from ``(src, rng, mult)`` triples.

        ``mult`` may be ``"*"``, ``"ω"`` or :data:`OMEGA` for an infinite group.
        """
        vs = tuple(vertices)
        groups = []
        for gid, (src, rng, mult) in enumerate(edges):
            if mult in ("*", "ω", "omega"):
                mult = OMEGA
            groups.append(EdgeGroup(gid, src, rng, mult))
        g = cls(vs, tuple(groups))
        validate(g)
        return g

    # -- local structure -------------------------------------------------

    def _index(self) -> dict:
        idx = self._memo.get("index")
        if idx is None:
            out: dict[str, list[EdgeGroup]] = {v: [] for v in self.vertices}
            inc: dict[str, list[EdgeGroup]] = {v: [] for v in self.vertices}
            for grp in self.groups:
                out[grp.source].append(grp)
                inc[grp.range].append(grp)
            idx = {
                "out": {v: tuple(gs) for v, gs in out.items()},
                "in": {v: tuple(gs) for v, gs in inc.items()},
            }
            self._memo["index"] = idx
        return idx

    def out_groups(self, v: str) -> tuple[EdgeGroup, ...]:
        return self._index()["out"][v]

    def in_groups(self, v: str) -> tuple[EdgeGroup, ...]:
        return self._index()["in"][v]

    def group(self, gid: int) -> EdgeGroup:
        return self.groups[gid]

    def is_sink(self, v: str) -> bool:
        return not self.out_groups(v)

    def is_infinite_emitter(self, v: str) -> bool:
        return any(grp.infinite for grp in self.out_groups(v))

    def is_regular(self, v: str) -> bool:
        return bool(self.out_groups(v)) and not self.is_infinite_emitter(v)

    def is_row_finite(self) -> bool:
        return not any(grp.infinite for grp in self.groups)

    @property
    def sinks(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if self.is_sink(v))

    @property
    def infinite_emitters(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if self.is_infinite_emitter(v))

    @property
    def sources(self) -> tuple[str, ...]:
        return tuple(v for v in self.vertices if not self.in_groups(v))

    def range_mult(self, v: str) -> dict[str, float]:
        """Total multiplicity of edges from ``v`` to each range vertex."""
        key = ("range_mult", v)
        res = self._memo.get(key)
        if res is None:
            res = {}
            for grp in self.out_groups(v):
                res[grp.range] = res.get(grp.range, 0) + grp.mult
            self._memo[key] = res
        return res

    def edge_range(self, e: Edge) -> str:
        return self.groups[e[0]].range

    def edge_source(self, e: Edge) -> str:
        return self.groups[e[0]].source

    def is_edge(self, e: Edge) -> bool:
        gid, i = e
        return 0 <= gid < len(self.groups) and 0 <= i < self.groups[gid].mult

    def out_edges(self, v: str) -> list[Edge]:
        """All concrete edges out of a regular vertex."""
        if self.is_infinite_emitter(v):
            raise GraphError(f"{v} emits infinitely many edges")
        return [e for grp in self.out_groups(v) for e in grp.edges()]

    def canonical_edges(self, v: str, r: str, start: int, stop: int) -> list[Edge]:
        """Edges ``start..stop-1`` in the canonical order of edges ``v -> r``.

        Groups with the same endpoints are concatenated in group order; this
        fixes a concrete representative for every range-count map.
        """
        res: list[Edge] = []
        offset = 0
        for grp in self.out_groups(v):
            if grp.range != r:
                continue
            lo = max(start - offset, 0)
            hi = stop - offset
            i = lo
            while i < hi and i < grp.mult:
                res.append((grp.gid, i))
                i += 1
            if grp.infinite or len(res) == stop - start:
                break
            offset += int(grp.mult)
        if len(res) != stop - start:
            raise GraphError(f"not enough edges {v} -> {r}")
        return res

    def canonical_position(self, e: Edge) -> int:
        """Position of ``e`` in the canonical order of edges with its endpoints."""
        grp = self.groups[e[0]]
        offset = 0
        for other in self.out_groups(grp.source):
            if other.gid == grp.gid:
                return offset + e[1]
            if other.range == grp.range:
                offset += int(other.mult)
        raise GraphError(f"unknown edge {e}")

    # -- paths -------------------------------------------------------------

    def successors(self, v: str) -> frozenset[str]:
        return frozenset(grp.range for grp in self.out_groups(v))

    def walks(self, v: str, length: int) -> frozenset[str]:
        """Vertices at the end of some path of exactly ``length`` edges from ``v``."""
        key = ("walks", v)
        layers = self._memo.get(key)
        if layers is None:
            layers = [frozenset([v])]
            self._memo[key] = layers
        while len(layers) <= length:
            prev = layers[-1]
            layers.append(frozenset(r for u in prev for r in self.successors(u)))
        return layers[length]

    def reaches(self, u: str, w: str) -> bool:
        """Whether a path (possibly trivial) leads from ``u`` to ``w``."""
        return w in reachable(self, [u])

    def on_cycle(self, v: str) -> bool:
        return any(self.reaches(r, v) for r in self.successors(v))

    def min_cycle_length(self, v: str, first: Iterable[str] | None = None) -> int | None:
        """Length of a shortest cycle at ``v``; ``first`` restricts the first edge's range."""
        starts = self.successors(v) if first is None else frozenset(first)
        dist = {r: 1 for r in starts}
        queue = deque(sorted(starts))
        while queue:
            u = queue.popleft()
            if u == v:
                return dist[u]
            for r in sorted(self.successors(u)):
                if r not in dist:
                    dist[r] = dist[u] + 1
                    queue.append(r)
        return None


def validate(g: Graph) -> None:
    seen: set[str] = set()
    for v in g.vertices:
        if not isinstance(v, str) or not VERTEX_RE.match(v) or v in RESERVED:
            raise GraphError(f"bad vertex id {v!r}")
        if v in seen:
            raise GraphError(f"duplicate vertex {v}")
        seen.add(v)
    for grp in g.groups:
        if grp.source not in seen or grp.range not in seen:
            raise GraphError(f"group {grp.gid} uses an unknown vertex")
        m = grp.mult
        if m != OMEGA and (isinstance(m, bool) or not float(m).is_integer() or m < 1):
            raise GraphError(f"group {grp.gid} has bad multiplicity {m!r}")


def parse_graph(text: str) -> Graph:
    """Parse the line format ``vertex <id>`` / ``edges <src> <rng> <mult|*>``."""
    vertices: list[str] = []
    edges: list[tuple[str, str, float, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "vertex" and len(parts) == 2:
            if parts[1] in vertices:
                raise GraphError(f"duplicate vertex {parts[1]}", lineno)
            if not VERTEX_RE.match(parts[1]) or parts[1] in RESERVED:
                raise GraphError(f"bad vertex id {parts[1]!r}", lineno)
            vertices.append(parts[1])
        elif parts[0] == "edges" and len(parts) == 4:
            src, rng, m = parts[1:]
            if m in ("*", "ω"):
                mult: float = OMEGA
            elif m.isdigit() and int(m) > 0:
                mult = int(m)
            else:
                raise GraphError(f"bad multiplicity {m!r}", lineno)
            edges.append((src, rng, mult, lineno))
        else:
            raise GraphError(f"cannot parse {line!r}", lineno)
    known = set(vertices)
    for src, rng, _, lineno in edges:
        for v in (src, rng):
            if v not in known:
                raise GraphError(f"unknown vertex {v}", lineno)
    return Graph.build(vertices, [(s, r, m) for s, r, m, _ in edges])


def format_graph(g: Graph) -> str:
    lines = [f"vertex {v}" for v in g.vertices]
    lines += [f"edges {grp.source} {grp.range} {_mult_text(grp.mult)}" for grp in g.groups]
    return "\n".join(lines) + "\n"


def reachable(g: Graph, start: Iterable[str]) -> frozenset[str]:
    """Vertices reachable from ``start`` by paths of length >= 0."""
    seen = set(start)
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for r in g.successors(u):
            if r not in seen:
                seen.add(r)
                queue.append(r)
    return frozenset(seen)


@dataclass(frozen=True)
class Cycle:
    """A vertex-simple closed path, recorded as the sequence of groups it uses.

    Parallel edges of one group give distinct concrete cycles; ``multiplicity``
    counts them and ``omega_parallel`` flags an infinite family.
    """

    base: str
    groups: tuple[int, ...]
    vertices: tuple[str, ...]
    multiplicity: float = 1

    @property
    def length(self) -> int:
        return len(self.groups)

    @property
    def omega_parallel(self) -> bool:
        return self.multiplicity == OMEGA

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple((gid, 0) for gid in self.groups)


def cycles_through(g: Graph, v: str) -> list[Cycle]:
    """Every cycle based at ``v``, one per sequence of groups."""
    found: list[Cycle] = []

    def dfs(u: str, path: list[EdgeGroup], visited: set[str]) -> None:
        for grp in g.out_groups(u):
            if grp.range == v:
                seq = path + [grp]
                mult = math.prod(x.mult for x in seq)
                found.append(Cycle(v, tuple(x.gid for x in seq),
                                   tuple([v] + [x.range for x in seq[:-1]]), mult))
            elif grp.range not in visited:
                visited.add(grp.range)
                dfs(grp.range, path + [grp], visited)
                visited.discard(grp.range)

    dfs(v, [], {v})
    return found


def all_cycles(g: Graph) -> list[Cycle]:
    """Every cycle once, based at its earliest vertex in declaration order."""
    order = {v: i for i, v in enumerate(g.vertices)}
    res = []
    for v in g.vertices:
        for c in cycles_through(g, v):
            if all(order[u] >= order[v] for u in c.vertices):
                res.append(c)
    return res


def cycle_has_exit(g: Graph, c: Cycle) -> bool:
    """Whether some vertex of ``c`` emits an edge not on ``c``."""
    for u, gid in zip(c.vertices, c.groups):
        if len(g.out_groups(u)) > 1 or g.groups[gid].mult > 1:
            return True
    return False


def is_acyclic(g: Graph) -> bool:
    return not any(g.on_cycle(v) for v in g.vertices)
