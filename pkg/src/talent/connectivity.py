"""Connecting generators by paths, and deciding ``a -> b`` exactly.

A chain of rewrites from a single monomial is recorded by a finite tree:
a node ``x^m v`` with ``v`` regular has one child per edge out of ``v``; a
node at an infinite emitter keeps one improper leaf ``x^m q_W`` and has one
child per edge of ``W`` (minus the edges already in ``Z`` for a node
``q_Z``).  Every leaf is a monomial of the result.  ``a -> b`` holds exactly
when the monomials of ``b`` can be distributed over such trees, one rooted at
each monomial of ``a``.

:class:`Matcher` searches for these trees.  It works in three modes:

``exact``
    the leaves are exactly the target (``a -> b``);
``contains``
    the leaves include the target, other leaves are unconstrained
    (``a -> b + c`` for some ``c``);
``within``
    the leaves form a sub-multiset of a pool (``a -> e'`` for some ``e' <= e``).

Nodes with the same degree and generator grow the same subtrees, so the
search computes, per node class, the sub-multisets of the target its trees
can supply.  Target monomials a node cannot reach by a walk of the right
length are ignored.  The sets are exact, so a ``No`` means no chain exists.
"""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .element import (Element, Generator, Improper, Monomial, Proper, format_monomial,
                      gen_key, shift, total)
from .graph import OMEGA, Edge, Graph
from .rewrite import RewriteStep, Verdict, replay

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

DEFAULT_BUDGET = 400_000


class MatchBudgetExceeded(RuntimeError):
    pass


# -- generator-level paths ----------------------------------------------

def _z_edges(graph: Graph, g: Improper) -> set[Edge]:
    """The canonical concrete edge set standing for ``Z``."""
    out: set[Edge] = set()
    for r, c in g.counts:
        out.update(graph.canonical_edges(g.vertex, r, 0, c))
    return out


def first_ranges(graph: Graph, g: Generator) -> frozenset[str]:
    """Ranges of the edges a path out of ``g`` may start with."""
    v = g.vertex
    if isinstance(g, Proper):
        return graph.successors(v)
    rm = graph.range_mult(v)
    return frozenset(r for r, m in rm.items() if g.count(r) < m)


@dataclass(frozen=True)
class GenPath:
    """A path witnessing that ``source`` connects to ``target``."""

    source: Generator
    target: Generator
    edges: tuple[Edge, ...]
    multiplicity: float = 1

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def case(self) -> str:
        return {(True, True): "i", (True, False): "ii",
                (False, True): "iii", (False, False): "iv"}[
            (isinstance(self.source, Proper), isinstance(self.target, Proper))]

    def to_json(self) -> dict:
        return {"source": str(self.source), "target": str(self.target),
                "edges": [list(e) for e in self.edges], "groups": [e[0] for e in self.edges],
                "case": self.case}


def connected_by(graph: Graph, g: Generator, h: Generator, edges: tuple[Edge, ...]) -> bool:
    """Whether ``g`` connects to ``h`` by the concrete path ``edges``."""
    if not edges:
        if isinstance(g, Proper):
            if isinstance(h, Proper):
                return h == g
            return h.vertex == g.vertex and graph.is_infinite_emitter(g.vertex)
        return isinstance(h, Improper) and g.le(h)
    if not all(graph.is_edge(e) for e in edges):
        return False
    u = g.vertex
    for e in edges:
        if graph.edge_source(e) != u:
            return False
        u = graph.edge_range(e)
    if u != h.vertex:
        return False
    if isinstance(g, Improper) and edges[0] in _z_edges(graph, g):
        return False
    return True


def connects(graph: Graph, g: Generator, h: Generator, length: int) -> list[GenPath]:
    """All paths of the given length by which ``g`` connects to ``h``.

    Parallel edges are collapsed to one path per sequence of groups; the
    representative uses the first admissible edge of each group and
    ``multiplicity`` counts the concrete paths it stands for.
    """
    if isinstance(h, Improper) and not graph.is_infinite_emitter(h.vertex):
        return []
    if length == 0:
        return [GenPath(g, h, ())] if connected_by(graph, g, h, ()) else []
    res: list[GenPath] = []
    z_edges = _z_edges(graph, g) if isinstance(g, Improper) else set()
    target = h.vertex

    def dfs(u: str, path: list[Edge], mult: float) -> None:
        left = length - len(path)
        if left == 0:
            if u == target:
                res.append(GenPath(g, h, tuple(path), mult))
            return
        for grp in graph.out_groups(u):
            if target not in graph.walks(grp.range, left - 1):
                continue
            if not path and z_edges:
                free = [e for e in _first_edges(graph, grp, z_edges)]
                if not free:
                    continue
                e, m = free[0], (OMEGA if grp.infinite else len(free))
            else:
                e, m = (grp.gid, 0), grp.mult
            dfs(grp.range, path + [e], mult * m)

    dfs(g.vertex, [], 1)
    return res


def _first_edges(graph: Graph, grp, z_edges: set[Edge]) -> list[Edge]:
    limit = int(grp.mult) if not grp.infinite else len(z_edges) + 1
    return [(grp.gid, i) for i in range(limit) if (grp.gid, i) not in z_edges]


def connects_any(graph: Graph, g: Generator, h: Generator) -> bool:
    """Whether ``g`` connects to ``h`` by some path (trivial paths included)."""
    if isinstance(h, Improper) and not graph.is_infinite_emitter(h.vertex):
        return False
    if connected_by(graph, g, h, ()):
        return True
    return any(graph.reaches(r, h.vertex) for r in first_ranges(graph, g))


def on_cycle(graph: Graph, g: Generator) -> bool:
    """Whether ``g`` connects to itself by a path of positive length."""
    return any(graph.reaches(r, g.vertex) for r in first_ranges(graph, g))


def min_cycle_length(graph: Graph, g: Generator) -> int | None:
    return graph.min_cycle_length(g.vertex, first_ranges(graph, g))


# -- path systems ---------------------------------------------------------

@dataclass
class PathSystem:
    """Witness for ``source -> target (+ rest)``.

    ``partition[i]`` lists the target monomials (indices into
    ``target.monomials()``) produced by source monomial ``i``; ``paths``
    maps ``(i, j)`` to the connecting path.  ``rest`` holds the leaves that
    are not part of the target (always zero for an exact arrow).
    """

    source: Element
    target: Element
    partition: tuple[tuple[int, ...], ...]
    paths: dict[tuple[int, int], GenPath]
    chain: tuple[RewriteStep, ...] = ()
    rest: Element = field(default_factory=Element)

    @property
    def result(self) -> Element:
        return self.target + self.rest

    def to_json(self, graph: Graph | None = None) -> dict:
        out = {
            "source": str(self.source),
            "target": str(self.target),
            "rest": str(self.rest),
            "partition": [list(p) for p in self.partition],
            "paths": [{"i": i, "j": j, **p.to_json()} for (i, j), p in sorted(self.paths.items())],
            "chain": [s.to_json() for s in self.chain],
        }
        if graph is not None:
            out["audit"] = prefix_audit(graph, self)
        return out


def _ext_sets(graph: Graph, paths: list[tuple[Edge, ...]], reading: str) -> dict:
    """``P_p`` for every prefix ``p`` of the given paths."""
    prefixes = {p[:k] for p in paths for k in range(len(p) + 1)}
    res = {}
    for p in prefixes:
        if reading == "anywhere":
            res[p] = None  # filled in by the caller, needs the end vertex
        else:
            res[p] = {q[len(p)] for q in paths if len(q) > len(p) and q[:len(p)] == p}
    return res


def _end_vertex(graph: Graph, g: Generator, p: tuple[Edge, ...]) -> str:
    return graph.edge_range(p[-1]) if p else g.vertex


def prefix_audit(graph: Graph, ps: PathSystem, reading: str = "extension") -> list[dict]:
    """Per-prefix records ``(i, prefix, vertex, P_p, leaf)`` for a path system."""
    src = ps.source.monomials()
    tgt = ps.target.monomials()
    rows = []
    for i, part in enumerate(ps.partition):
        g = src[i][1]
        paths = [ps.paths[(i, j)].edges for j in part]
        ext = _ext_sets(graph, paths, "extension")
        for p in sorted(ext, key=lambda q: (len(q), q)):
            v = _end_vertex(graph, g, p)
            if reading == "anywhere":
                pp = {e for q in paths for e in q if graph.edge_source(e) == v}
            else:
                pp = ext[p]
            leaf = [j for j in part if ps.paths[(i, j)].edges == p]
            rows.append({"i": i, "prefix": [list(e) for e in p], "vertex": v,
                         "P": sorted(list(e) for e in pp),
                         "leaf": [format_monomial(tgt[j]) for j in leaf]})
    return rows


def validate_path_system(graph: Graph, ps: PathSystem, reading: str = "tree",
                         complete: bool = True) -> tuple[bool, str]:
    """Check a path system against the prefix conditions.

    ``reading="tree"`` checks the conditions that characterise ``a -> b``:
    a regular prefix is either a proper leaf with nothing beyond it or uses
    every edge out of its vertex; an emitter prefix carries exactly one
    improper leaf ``q_W`` whose new edges are exactly the edges used beyond
    it.  ``"extension"`` and ``"anywhere"`` check the weaker per-prefix
    conditions (i)-(iii) with ``P_p`` read as the edges extending ``p`` or as
    the edges lying anywhere on the block's paths.

    With ``complete=False`` the paths need only be part of such trees (the
    remaining leaves being free), and blocks may be empty.
    """
    src = ps.source.monomials()
    tgt = ps.target.monomials()
    seen: Counter = Counter(j for part in ps.partition for j in part)
    if len(ps.partition) != len(src):
        return False, "partition does not match the source"
    if sorted(seen) != list(range(len(tgt))) or any(c != 1 for c in seen.values()):
        return False, "partition does not cover the target exactly once"
    if complete and any(not part for part in ps.partition):
        return False, "empty block"
    for i, part in enumerate(ps.partition):
        m_i, g = src[i]
        for j in part:
            t_j, h = tgt[j]
            p = ps.paths.get((i, j))
            if p is None or p.source != g or p.target != h:
                return False, f"missing path ({i},{j})"
            if p.length != t_j - m_i:
                return False, f"path ({i},{j}) has the wrong length"
            if not connected_by(graph, g, h, p.edges):
                return False, f"path ({i},{j}) does not connect {g} to {h}"
        items = [(j, ps.paths[(i, j)].edges, tgt[j][1]) for j in part]
        if reading == "tree":
            ok, why = _tree_block(graph, g, items, complete)
        else:
            ok, why = _literal_block(graph, g, items, reading)
        if not ok:
            return False, f"block {i}: {why}"
    return True, "ok"


def _literal_block(graph, g, items, reading):
    paths = [p for _, p, _ in items]
    ext = _ext_sets(graph, paths, "extension")
    for p in ext:
        v = _end_vertex(graph, g, p)
        if reading == "anywhere":
            pp = {e for q in paths for e in q if graph.edge_source(e) == v}
        else:
            pp = ext[p]
        counts = Counter(graph.edge_range(e) for e in pp)
        if graph.is_regular(v) and not (isinstance(g, Improper) and not p):
            if pp and pp != set(graph.out_edges(v)):
                return False, f"regular prefix at {v} uses only some edges"
        if graph.is_infinite_emitter(v) and pp:
            if not any(isinstance(h, Improper) and h.vertex == v
                       and all(c <= h.count(r) for r, c in counts.items()) for _, _, h in items):
                return False, f"emitter prefix at {v} has no improper leaf covering it"
        for _, q, h in items:
            if q == p and isinstance(h, Improper):
                if not all(c <= h.count(r) for r, c in counts.items()):
                    return False, f"improper leaf at {v} does not cover P_p"
    return True, "ok"


def _tree_block(graph, g, items, complete):
    paths = [p for _, p, _ in items]
    if len(set(paths)) != len(paths):
        return False, "two leaves share a path"
    ext = _ext_sets(graph, paths, "extension")
    leaf_at = {p: h for _, p, h in items}
    for p, pp in ext.items():
        v = _end_vertex(graph, g, p)
        improper_root = isinstance(g, Improper) and not p
        h = leaf_at.get(p)
        if isinstance(h, Proper):
            if pp:
                return False, f"proper leaf at {v} has edges beyond it"
            continue
        if h is None:
            if graph.is_sink(v) and not improper_root:
                return False, f"path continues past the sink {v}"
            if not complete:
                if improper_root and pp & _z_edges(graph, g):
                    return False, "edge of Z used again"
                continue
            if improper_root or not graph.is_regular(v):
                return False, f"prefix at {v} needs an improper leaf"
            if pp != set(graph.out_edges(v)):
                return False, f"regular prefix at {v} uses only some edges"
            continue
        # improper leaf q_W at this prefix
        if h.vertex != v:
            return False, "improper leaf at the wrong vertex"
        base = dict(g.counts) if improper_root else {}
        z = _z_edges(graph, g) if improper_root else set()
        if pp & z:
            return False, "edge of Z used again"
        counts = Counter(base)
        counts.update(graph.edge_range(e) for e in pp)
        if complete and Improper.of(v, counts) != h:
            return False, f"improper leaf {h} does not match the edges used at {v}"
        if not complete and not Improper.of(v, counts).le(h) and counts:
            return False, f"improper leaf {h} does not cover the edges used at {v}"
    return True, "ok"


# -- the matcher ----------------------------------------------------------

@dataclass
class _Node:
    id: int
    deg: int
    gen: Generator
    root: int
    root_deg: int
    path: tuple[Edge, ...]


class Matcher:
    """Search for expansion trees from ``source`` whose leaves fit ``target``.

    Modes: ``exact`` (the leaves are ``target``), ``contains`` (they include
    it, the others forming the rest) and ``within`` (they form a
    sub-multiset of it, a proper one when ``strict``).
    """

    def __init__(self, graph: Graph, source: Element, target: Element, mode: str = "exact",
                 a1_only: bool = False, min_depth: int = 0, strict: bool = False,
                 budget: int = DEFAULT_BUDGET):
        if mode not in ("exact", "contains", "within"):
            raise ValueError(mode)
        self.graph = graph
        self.source = source
        self.target = target
        self.mode = mode
        self.a1_only = a1_only
        self.min_depth = min_depth
        self.strict = strict
        self.budget = budget
        self.calls = 0
        self.items: list[Monomial] = [m for m, _ in target.terms]
        self.index = {m: k for k, m in enumerate(self.items)}
        self.by_gen: dict[tuple, list[int]] = {}
        for k, (d, h) in enumerate(self.items):
            if isinstance(h, Improper):
                self.by_gen.setdefault((d, h.vertex), []).append(k)
        self.yield_cache: dict = {}
        self.next_id = 0

    # reachability of target items from a node

    def _walks(self, v: str, length: int) -> frozenset[str]:
        if not self.a1_only:
            return self.graph.walks(v, length)
        key = ("regwalks", v, length)
        res = self.yield_cache.get(key)
        if res is None:
            if length == 0:
                res = frozenset([v])
            elif not self.graph.is_regular(v):
                res = frozenset()
            else:
                res = frozenset().union(*(self._walks(r, length - 1) for r in self.graph.successors(v)))
            self.yield_cache[key] = res
        return res

    def yields(self, deg: int, gen: Generator) -> frozenset[int]:
        """Target items that can be leaves of some tree from ``x^deg gen``."""
        key = (deg, gen)
        res = self.yield_cache.get(key)
        if res is not None:
            return res
        g = self.graph
        out = set()
        v = gen.vertex
        starts: Iterable[str]
        if isinstance(gen, Proper):
            starts = g.successors(v) if (g.is_regular(v) or (g.is_infinite_emitter(v) and not self.a1_only)) else ()
        else:
            starts = () if self.a1_only else first_ranges(g, gen)
        for k, (t, h) in enumerate(self.items):
            L = t - deg
            if L < 0:
                continue
            if L == 0:
                if h == gen:
                    out.add(k)
                elif (isinstance(h, Improper) and h.vertex == v and not self.a1_only
                      and (isinstance(gen, Proper) and g.is_infinite_emitter(v)
                           or isinstance(gen, Improper) and gen.le(h))):
                    out.add(k)
                continue
            if isinstance(h, Improper) and (self.a1_only or not g.is_infinite_emitter(h.vertex)):
                continue
            if any(h.vertex in self._walks(r, L - 1) for r in starts):
                out.add(k)
        res = frozenset(out)
        self.yield_cache[key] = res
        return res

    # search

    def _new(self, deg, gen, root, root_deg, path) -> _Node:
        self.next_id += 1
        return _Node(self.next_id, deg, gen, root, root_deg, path)

    def run(self):
        roots = [self._new(d, g, i, d, ()) for i, (d, g) in enumerate(self.source.monomials())]
        self.roots = roots
        return _AntichainSolver(self).solve(roots)

    def _a1_children(self, node: _Node) -> list[_Node]:
        return [self._new(node.deg + 1, Proper(grp.range), node.root, node.root_deg,
                          node.path + ((grp.gid, i),))
                for grp in self.graph.out_groups(node.gen.vertex) for i in range(int(grp.mult))]

    def _children(self, node: _Node, old: dict, w: dict) -> list[_Node]:
        v = node.gen.vertex
        res = []
        for r in sorted(w):
            lo = old.get(r, 0)
            for e in self.graph.canonical_edges(v, r, lo, w[r]):
                res.append(self._new(node.deg + 1, Proper(r), node.root, node.root_deg,
                                     node.path + (e,)))
        return res

    # witness

    def witness(self, decisions) -> PathSystem:
        src = self.source.monomials()
        tgt = self.target.monomials()
        slots: dict[Monomial, list[int]] = {}
        for j, m in enumerate(tgt):
            slots.setdefault(m, []).append(j)
        partition: list[list[int]] = [[] for _ in src]
        paths: dict[tuple[int, int], GenPath] = {}
        chain: list[RewriteStep] = []
        rest: Counter = Counter()
        for dec in decisions:
            kind, node = dec[0], dec[1]
            if kind == "leaf":
                self._place(node, node.gen, node.path, slots, partition, paths)
            elif kind == "drop":
                rest[(node.deg, node.gen)] += 1
            else:
                step, q = dec[2], dec[3]
                chain.append(step)
                if step.axiom == "A1":
                    continue
                leaf = Improper.of(node.gen.vertex, dict(step.params))
                if q == "free":
                    rest[(node.deg, leaf)] += 1
                else:
                    self._place(node, leaf, node.path, slots, partition, paths)
        psys = PathSystem(self.source, self.target, tuple(tuple(sorted(p)) for p in partition),
                          paths, tuple(chain), Element(rest))
        return psys

    def _place(self, node, gen, path, slots, partition, paths):
        m = (node.deg, gen)
        j = slots[m].pop(0)
        partition[node.root].append(j)
        paths[(node.root, j)] = GenPath(self.source.monomials()[node.root][1], gen, path)


def _compositions(total: int, tops: list[int]):
    """Tuples of nonnegative integers summing to ``total`` with ``t[i] <= tops[i]``."""
    if not tops:
        if total == 0:
            yield ()
        return
    for c in range(min(total, tops[0]), -1, -1):
        for tail in _compositions(total - c, tops[1:]):
            yield (c,) + tail


class _AntichainSolver:
    """Contains mode: the leaves of expansion trees must include the target.

    Leaves left over go to the rest, so any node may contribute nothing.
    For each node class (degree, generator, depth still required before a
    leaf may count) the solver computes the set of sub-multisets of the
    target its subtrees can supply.  Sub-multisets are encoded in mixed
    radix, one digit per target monomial.
    """

    MAX_VECTORS = 1 << 14

    def __init__(self, m: Matcher):
        self.m = m
        self.caps = [c for _, c in m.target.terms]
        self.radix = []
        size = 1
        for c in self.caps:
            self.radix.append(size)
            size *= c + 1
        if size > self.MAX_VECTORS:
            raise MatchBudgetExceeded(f"target has {size} sub-multisets")
        self.full = size - 1
        self.optional = m.mode == "contains"
        self._digits: dict[int, tuple[int, ...]] = {}
        self.top = max((d for (d, _), _ in m.target.terms), default=-1)
        self.total = sum(self.caps)
        self.memo: dict = {}

    def digits(self, i: int) -> tuple[int, ...]:
        d = self._digits.get(i)
        if d is None:
            d = self._digits[i] = tuple((i // r) % (c + 1) for r, c in zip(self.radix, self.caps))
        return d

    def _fits(self, i: int, j: int) -> bool:
        return all(x + y <= c for x, y, c in zip(self.digits(i), self.digits(j), self.caps))

    def plus(self, S: frozenset, T: frozenset) -> frozenset:
        self.m.calls += len(S) * len(T)
        if self.m.calls > self.m.budget:
            raise MatchBudgetExceeded(f"matcher budget of {self.m.budget} exhausted")
        return frozenset(i + j for i in S for j in T if self._fits(i, j))

    def minus(self, i: int, j: int) -> int | None:
        if all(x >= y for x, y in zip(self.digits(i), self.digits(j))):
            return i - j
        return None

    # the options at a node: (kind, unit, step, item, children), children as (deg, gen, need)

    def options(self, deg: int, gen: Generator, need: int):
        m, g = self.m, self.m.graph
        v = gen.vertex
        k = m.index.get((deg, gen))
        if k is not None and need == 0:
            yield "leaf", self.radix[k], None, k, []
        nxt = max(need - 1, 0)
        if isinstance(gen, Proper) and g.is_regular(v):
            kids = [(deg + 1, Proper(grp.range), nxt)
                    for grp in g.out_groups(v) for _ in range(int(grp.mult))]
            yield "expand", 0, RewriteStep("A1", deg, gen), None, kids
            return
        if m.a1_only or not (isinstance(gen, Improper) or g.is_infinite_emitter(v)):
            return
        old = gen.as_dict() if isinstance(gen, Improper) else {}
        axiom = "A3" if old else "A2"
        if need == 0:
            for kq in m.by_gen.get((deg, v), ()):
                h = m.items[kq][1]
                w = h.as_dict()
                if h == gen or any(w.get(r, 0) < c for r, c in old.items()):
                    continue
                kids = [(deg + 1, Proper(r), nxt) for r in sorted(w) for _ in range(w[r] - old.get(r, 0))]
                yield "expand", self.radix[kq], RewriteStep(axiom, deg, gen, h.counts), kq, kids
        w = dict(old)
        for r, mult in sorted(g.range_mult(v).items()):
            room = mult - old.get(r, 0)
            if room > 0 and m.yields(deg + 1, Proper(r)):
                w[r] = old.get(r, 0) + int(min(room, self.total))
        if w != old and self.optional:
            kids = [(deg + 1, Proper(r), nxt) for r in sorted(w) for _ in range(w[r] - old.get(r, 0))]
            yield "expand", 0, RewriteStep(axiom, deg, gen, tuple(sorted(w.items()))), "free", kids

    def achievable(self, deg: int, gen: Generator, need: int) -> frozenset:
        key = (deg, gen, need)
        res = self.memo.get(key)
        if res is not None:
            return res
        out = {0} if self.optional else set()
        if deg <= self.top and self.m.yields(deg, gen):
            for _, unit, _, _, kids in self.options(deg, gen, need):
                acc = frozenset([unit])
                for kid in kids:
                    acc = self.plus(acc, self.achievable(*kid))
                out |= acc
        res = frozenset(out)
        self.memo[key] = res
        return res

    def _split(self, sets: list[frozenset], want: int) -> list[int] | None:
        prefix = [frozenset([0])]
        for S in sets:
            prefix.append(self.plus(prefix[-1], S))
        if want not in prefix[-1]:
            return None
        parts = []
        for i in range(len(sets), 0, -1):
            for x in sorted(sets[i - 1]):
                y = self.minus(want, x)
                if y is not None and y in prefix[i - 1]:
                    parts.append(x)
                    want = y
                    break
        return parts[::-1]

    def decide(self, node: _Node, need: int, want: int) -> list:
        if want == 0:
            return [("drop", node)]
        m = self.m
        for kind, unit, step, item, kids in self.options(node.deg, node.gen, need):
            if kind == "leaf":
                if want == unit:
                    return [("leaf", node, item)]
                continue
            rest = self.minus(want, unit)
            if rest is None:
                continue
            if item == "free":
                step, kids = self._smallest_free(node, step, kids, rest)
            parts = self._split([self.achievable(*kid) for kid in kids], rest)
            if parts is None:
                continue
            if step.axiom == "A1":
                children = m._a1_children(node)
                decision = ("expand", node, step, None)
            else:
                old = node.gen.as_dict() if isinstance(node.gen, Improper) else {}
                children = m._children(node, old, dict(step.params))
                decision = ("expand", node, step, item)
            out = [decision]
            for child, kid, part in zip(children, kids, parts):
                out += self.decide(child, kid[2], part)
            return out
        raise AssertionError("achievable set without a decomposition")  # pragma: no cover

    def _smallest_free(self, node: _Node, step: RewriteStep, kids: list, want: int):
        """Shrink the largest free ``W`` to one of least size still supplying ``want``."""
        old = node.gen.as_dict() if isinstance(node.gen, Improper) else {}
        top = dict(step.params)
        ranges = [r for r in sorted(top) if top[r] > old.get(r, 0)]
        nxt = kids[0][2]
        for size in range(1, sum(top[r] - old.get(r, 0) for r in ranges) + 1):
            for extra in _compositions(size, [top[r] - old.get(r, 0) for r in ranges]):
                w = dict(old)
                for r, c in zip(ranges, extra):
                    if c:
                        w[r] = old.get(r, 0) + c
                cand = [(node.deg + 1, Proper(r), nxt) for r in sorted(w) for _ in range(w[r] - old.get(r, 0))]
                if self._split([self.achievable(*kid) for kid in cand], want) is not None:
                    return RewriteStep(step.axiom, step.degree, step.generator, tuple(sorted(w.items()))), cand
        return step, kids  # pragma: no cover - the largest W always works

    def solve(self, roots: list[_Node]):
        need = self.m.min_depth
        sets = [self.achievable(r.deg, r.gen, need) for r in roots]
        if self.m.mode == "within":
            reach = frozenset([0])
            for S in sets:
                reach = self.plus(reach, S)
            wants = sorted(w for w in reach if not (self.m.strict and w == self.full))
            if not wants:
                return None
            want = wants[-1]
        else:
            want = self.full
        parts = self._split(sets, want)
        if parts is None:
            return None
        out = []
        for root, part in zip(roots, parts):
            out += self.decide(root, need, part)
        return out


def match(graph: Graph, source: Element, target: Element, mode: str = "exact",
          **kw) -> Verdict[PathSystem]:
    m = Matcher(graph, source, target, mode, **kw)
    try:
        decisions = m.run()
    except MatchBudgetExceeded as exc:
        return Verdict.unknown(str(exc))
    if decisions is None:
        return Verdict.no(f"no expansion trees from {source} fit {target} ({mode})")
    ps = m.witness(decisions)
    end = replay(graph, source, ps.chain)
    expected = used_part(ps) if mode == "within" else ps.target + ps.rest
    if end != expected:  # pragma: no cover - internal consistency
        raise AssertionError(f"witness replays to {end}, expected {expected}")
    return Verdict.yes(ps)


def decide_arrow(graph: Graph, a: Element, b: Element, **kw) -> Verdict[PathSystem]:
    """Decide ``a -> b``; a yes carries a path system and a replayable chain."""
    if a.is_zero or b.is_zero:
        raise ValueError("decide_arrow needs nonzero elements")
    return match(graph, a, b, "exact", **kw)


def decide_arrow_a1(graph: Graph, a: Element, b: Element) -> Verdict[PathSystem]:
    """Decide ``a -> b`` using axiom A1 only; ``a`` must consist of regular vertices."""
    for (_, g), _ in a.terms:
        if not isinstance(g, Proper) or not graph.is_regular(g.vertex):
            raise ValueError(f"{g} is not a regular vertex")
    if a.is_zero or b.is_zero:
        raise ValueError("decide_arrow_a1 needs nonzero elements")
    return match(graph, a, b, "exact", a1_only=True)


def decide_contains(graph: Graph, a: Element, t: Element, min_depth: int = 0,
                    **kw) -> Verdict[PathSystem]:
    """Decide ``a -> t + c`` for some ``c``; the witness's ``rest`` is ``c``."""
    return match(graph, a, t, "contains", min_depth=min_depth, **kw)


def decide_within(graph: Graph, a: Element, pool: Element, strict: bool = False,
                  **kw) -> Verdict[PathSystem]:
    """Decide ``a -> e'`` for some sub-multiset ``e'`` of ``pool``.

    With ``strict`` the sub-multiset must be proper.  The witness's target
    is ``pool``; its partition only covers ``e'``.
    """
    return match(graph, a, pool, "within", strict=strict, **kw)


def used_part(ps: PathSystem) -> Element:
    tgt = ps.target.monomials()
    return Element([tgt[j] for part in ps.partition for j in part])


# -- support-level connectivity --------------------------------------------

@dataclass
class Tree:
    gen: Generator
    children: list[tuple[Edge, "Tree"]] = field(default_factory=list)
    qleaf: Improper | None = None

    def leaves(self, depth: int = 0) -> list[Monomial]:
        if not self.children and self.qleaf is None:
            return [(depth, self.gen)]
        out: list[Monomial] = [(depth, self.qleaf)] if self.qleaf is not None else []
        for _, t in self.children:
            out += t.leaves(depth + 1)
        return out


@dataclass
class SupportSystem:
    """Trees connecting a set of generators to a set of generators.

    Every tree is rooted at an element of ``G`` and has all its leaves in
    ``H``; every element of ``G`` roots a tree and every element of ``H``
    is a leaf of one.
    """

    G: frozenset
    H: frozenset
    trees: list[Tree]
    source: Element
    target: Element
    path_system: PathSystem | None = None

    def tree_for(self, g: Generator) -> Tree:
        return next(t for t in self.trees if t.gen == g)


class _SupportSolver:
    def __init__(self, graph: Graph, H: frozenset, a1_only: bool):
        self.graph = graph
        self.H = H
        self.a1_only = a1_only
        self.hq: dict[str, list[Improper]] = {}
        for h in sorted(H, key=gen_key):
            if isinstance(h, Improper):
                self.hq.setdefault(h.vertex, []).append(h)
        self.rank = self._ranks()

    def _q_options(self, v: str, old: dict):
        """Improper leaves usable at an emitter node, with their new ranges."""
        if self.a1_only:
            return
        for h in self.hq.get(v, ()):
            w = h.as_dict()
            if all(w.get(r, 0) >= c for r, c in old.items()) and w != old:
                yield h, sorted(r for r in w for _ in range(w[r] - old.get(r, 0)))

    def _ranks(self) -> dict[str, int]:
        """Least fixed point: rank of each vertex having a tree with leaves in ``H``."""
        g = self.graph
        rank = {v: 0 for v in g.vertices if Proper(v) in self.H}
        changed = True
        while changed:
            changed = False
            for v in g.vertices:
                if v in rank:
                    continue
                best = None
                if g.is_regular(v):
                    if all(s in rank for s in g.successors(v)):
                        best = 1 + max(rank[s] for s in g.successors(v))
                elif g.is_infinite_emitter(v):
                    for _, rs in self._q_options(v, {}):
                        if all(r in rank for r in rs):
                            val = 1 + max(rank[r] for r in rs)
                            best = val if best is None else min(best, val)
                if best is not None:
                    rank[v] = best
                    changed = True
        return rank

    def good(self, gen: Generator) -> bool:
        if gen in self.H:
            return True
        if isinstance(gen, Proper):
            return gen.vertex in self.rank
        return any(all(r in self.rank for r in rs) for _, rs in self._q_options(gen.vertex, gen.as_dict()))

    def leaf_sets(self) -> dict[str, set]:
        g = self.graph
        leaves: dict[str, set] = {v: ({Proper(v)} if Proper(v) in self.H else set()) for v in self.rank}
        changed = True
        while changed:
            changed = False
            for v in self.rank:
                new = set(leaves[v])
                if g.is_regular(v) and all(s in self.rank for s in g.successors(v)):
                    for s in g.successors(v):
                        new |= leaves[s]
                elif g.is_infinite_emitter(v):
                    for h, rs in self._q_options(v, {}):
                        if all(r in self.rank for r in rs):
                            new.add(h)
                            for r in rs:
                                new |= leaves[r]
                if new != leaves[v]:
                    leaves[v] = new
                    changed = True
        return leaves

    def root_leaves(self, gen: Generator, leaves: dict[str, set]) -> set:
        if isinstance(gen, Proper):
            return leaves.get(gen.vertex, set())
        out = {gen} if gen in self.H else set()
        for h, rs in self._q_options(gen.vertex, gen.as_dict()):
            if all(r in self.rank for r in rs):
                out.add(h)
                for r in rs:
                    out |= leaves[r]
        return out

    def distances(self, leaves: dict[str, set]) -> dict[tuple[str, Generator], int]:
        """Shortest depth at which a tree from ``v`` can carry the leaf ``h``."""
        g = self.graph
        dist: dict[tuple[str, Generator], int] = {}
        for v in self.rank:
            if Proper(v) in self.H:
                dist[(v, Proper(v))] = 0
            if g.is_infinite_emitter(v):
                for h, rs in self._q_options(v, {}):
                    if all(r in self.rank for r in rs):
                        dist[(v, h)] = 0
        changed = True
        while changed:
            changed = False
            for v in self.rank:
                for h in leaves[v]:
                    best = dist.get((v, h))
                    for s in self._child_ranges(v):
                        ds = dist.get((s, h))
                        if ds is not None and (best is None or ds + 1 < best):
                            best = ds + 1
                    if best is not None and dist.get((v, h)) != best:
                        dist[(v, h)] = best
                        changed = True
        return dist

    def _child_ranges(self, v: str) -> set[str]:
        g = self.graph
        if g.is_regular(v):
            return set(g.successors(v)) if all(s in self.rank for s in g.successors(v)) else set()
        out: set[str] = set()
        for _, rs in self._q_options(v, {}):
            if all(r in self.rank for r in rs):
                out |= set(rs)
        return out


def _build_tree(solver: _SupportSolver, dist, gen: Generator, targets: set, budget: list,
                branch: frozenset = frozenset()) -> Tree:
    """A tree from ``gen`` with leaves in ``H`` that carries every leaf in ``targets``.

    Raises :class:`MatchBudgetExceeded` when the greedy split of ``targets``
    fails; the caller then builds one tree per target instead.
    """
    budget[0] -= 1
    if budget[0] < 0:
        raise MatchBudgetExceeded("support tree construction did not settle")
    state = (gen, frozenset(targets))
    if state in branch:
        raise MatchBudgetExceeded(f"targets {sorted(map(str, targets))} cycle back to {gen}")
    branch = branch | {state}
    g = solver.graph
    if gen in solver.H and targets <= {gen}:
        return Tree(gen)
    v = gen.vertex
    old = gen.as_dict() if isinstance(gen, Improper) else {}
    if isinstance(gen, Proper) and g.is_regular(v):
        edge_list = g.out_edges(v)
        kids = [g.edge_range(e) for e in edge_list]
        qleaf = None
    else:
        options = [(h, rs) for h, rs in solver._q_options(v, old) if all(r in solver.rank for r in rs)]
        if not options:
            raise MatchBudgetExceeded(f"{gen} has no tree")
        wanted = [h for h in targets if isinstance(h, Improper) and h.vertex == v]
        lowest = min(options, key=lambda o: max(solver.rank[r] for r in o[1]))
        chosen = next(((h, rs) for h, rs in options if h in wanted), lowest)
        qleaf, rs = chosen
        counts: Counter = Counter()
        edge_list = []
        for r in rs:
            lo = old.get(r, 0) + counts[r]
            edge_list += g.canonical_edges(v, r, lo, lo + 1)
            counts[r] += 1
        kids = list(rs)
        targets = targets - {qleaf}
        if gen in targets and isinstance(gen, Improper):
            targets = targets - {gen}
    assign: list[set] = [set() for _ in kids]
    for h in sorted(targets, key=gen_key):
        best = None
        for idx, r in enumerate(kids):
            dd = dist.get((r, h))
            if dd is not None and (best is None or dd < best[0]):
                best = (dd, idx)
        if best is None:
            raise MatchBudgetExceeded(f"{h} is not reachable below {gen}")
        assign[best[1]].add(h)
    children = [(e, _build_tree(solver, dist, Proper(r), assign[i], budget, branch))
                for i, (e, r) in enumerate(zip(edge_list, kids))]
    return Tree(gen, children, qleaf)


def _support_trees(graph: Graph, G: frozenset, H: frozenset, a1_only: bool):
    solver = _SupportSolver(graph, H, a1_only)
    bad = [g for g in sorted(G, key=gen_key) if not solver.good(g)]
    if bad:
        return None, f"no tree with leaves in H from {', '.join(map(str, bad))}"
    leaves = solver.leaf_sets()
    reach = {g: solver.root_leaves(g, leaves) for g in G}
    covered = set().union(*reach.values()) if reach else set()
    missing = [h for h in sorted(H, key=gen_key) if h not in covered]
    if missing:
        return None, f"{', '.join(map(str, missing))} cannot be reached"
    dist = solver.distances(leaves)
    for g in G:
        if isinstance(g, Improper):
            dist[(g.vertex, g)] = dist.get((g.vertex, g), 0)
    order = sorted(G, key=gen_key)
    assign = {g: set() for g in order}
    for h in sorted(H, key=gen_key):
        owner = next(g for g in order if h in reach[g])
        assign[owner].add(h)
    trees = []
    for g in order:
        try:
            trees.append(_build_tree(solver, dist, g, assign[g], [10_000]))
        except MatchBudgetExceeded:
            trees.append(_build_tree(solver, dist, g, set(), [10_000]))
            for h in sorted(assign[g], key=gen_key):
                trees.append(_build_tree(solver, dist, g, {h}, [10_000]))
    return trees, ""


def _check_supports(G, H):
    G, H = frozenset(G), frozenset(H)
    if not G or not H:
        raise ValueError("supports must be nonempty")
    return G, H


def supports_connect(graph: Graph, G: Iterable[Generator], H: Iterable[Generator],
                     a1_only: bool = False) -> Verdict[SupportSystem]:
    """Decide whether some element supported on ``G`` rewrites to one supported on ``H``."""
    G, H = _check_supports(G, H)
    trees, why = _support_trees(graph, G, H, a1_only)
    if trees is None:
        return Verdict.no(why)
    source = Element([(0, t.gen) for t in trees])
    target = total(Element(t.leaves()) for t in trees)
    verdict = match(graph, source, target, "exact", a1_only=a1_only)
    if not verdict.is_yes:  # pragma: no cover - internal consistency
        raise AssertionError(f"support trees do not give an arrow: {verdict.reason}")
    return Verdict.yes(SupportSystem(G, H, trees, source, target, verdict.witness))


def supports_connect_a1(graph: Graph, G: Iterable[Generator],
                        H: Iterable[Generator]) -> Verdict[SupportSystem]:
    G, H = _check_supports(G, H)
    for g in G | H:
        if not isinstance(g, Proper):
            raise ValueError(f"{g} is not a proper vertex")
    for g in G:
        if not graph.is_regular(g.vertex):
            raise ValueError(f"{g} is not a regular vertex")
    return supports_connect(graph, G, H, a1_only=True)


def realize_from_supports(graph: Graph, a: Element, system: SupportSystem) -> Element:
    """An element ``c`` with ``supp(c) <= H`` and ``a -> c``, built from the trees."""
    out = []
    for (m, g), k in a.terms:
        if g not in system.G:
            raise ValueError(f"{g} is outside the source support")
        tree = system.tree_for(g)
        out += [shift(Element(tree.leaves()), m)] * k
    return total(out)


__all__ = [
    "GenPath", "Matcher", "PathSystem", "SupportSystem", "Tree", "connected_by", "connects",
    "connects_any", "decide_arrow", "decide_arrow_a1", "decide_contains", "decide_within",
    "first_ranges", "match", "min_cycle_length", "on_cycle", "prefix_audit",
    "realize_from_supports", "supports_connect", "supports_connect_a1", "used_part",
    "validate_path_system",
]
