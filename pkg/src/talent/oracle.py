"""Search-based answers for ``->``, ``~`` and the pre-order, with witnesses.

``brute_force_arrow`` only rewrites forward and compares: it never consults
the path-system machinery, so it serves as an independent check on
:func:`talent.connectivity.decide_arrow`.  Its search is target-directed:
rewriting never lowers a degree and never shrinks an element, so states with
a monomial of too high a degree, or with too many monomials, are discarded.
Under these cuts the search space is finite.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace

from .connectivity import decide_arrow, decide_within, first_ranges, used_part
from .element import Element, Improper, Monomial, Proper, format_monomial
from .graph import Graph
from .rewrite import DEFAULT_CAPS, RewriteStep, SearchCaps, Verdict, expand, explore, replay, successors


# -- arrows -----------------------------------------------------------------

def _potential(a: Element, floor: int) -> int:
    return sum((d - floor + 1) * c for (d, _), c in a.terms)


def _can_descend(graph: Graph, m: Monomial, target: Element) -> bool:
    """Cheap necessary condition for ``m`` to contribute to ``target``."""
    d, g = m
    v = g.vertex
    starts = first_ranges(graph, g)
    for (t, h), _ in target.terms:
        if t < d:
            continue
        if t == d:
            if h == g or (isinstance(h, Improper) and h.vertex == v and (
                    isinstance(g, Proper) and graph.is_infinite_emitter(v)
                    or isinstance(g, Improper) and g.le(h))):
                return True
            continue
        if isinstance(g, Proper) and graph.is_sink(v):
            continue
        if any(h.vertex in graph.walks(r, t - d - 1) for r in starts):
            return True
    return False


def search_chain(graph: Graph, a: Element, b: Element,
                 caps: SearchCaps = DEFAULT_CAPS) -> tuple[list[RewriteStep] | None, bool]:
    """Breadth-first search for a chain ``a -> b``.

    Returns the chain (or ``None``) and whether the search was exhaustive.
    Only ``caps.max_states`` bounds it; depth and new counts are bounded by
    the target itself.
    """
    if a == b:
        return [], True
    if a.is_zero or b.is_zero:
        return None, True
    size = len(b)
    top = b.degrees()[1]
    floor = min(a.degrees()[0], b.degrees()[0])
    depth = max(_potential(b, floor) - _potential(a, floor), 0)

    def keep(e: Element) -> bool:
        if len(e) > size:
            return False
        for m, _ in e.terms:
            if m[0] > top or not _can_descend(graph, m, b):
                return False
        return True

    if not keep(a):
        return None, True
    search_caps = SearchCaps(max_depth=depth, max_monomials=size,
                             max_new_count=size, max_states=caps.max_states)
    ex = explore(graph, a, search_caps, keep=keep,
                 limit=lambda e: max(size - len(e), 0), stop=lambda e: e == b)
    if b in ex.parent:
        return ex.chain_to(b), True
    return None, not (ex.truncated and "state cap" in ex.reasons)


def brute_force_arrow(graph: Graph, a: Element, b: Element,
                      caps: SearchCaps = DEFAULT_CAPS) -> Verdict[list[RewriteStep]]:
    chain, exhaustive = search_chain(graph, a, b, caps)
    if chain is not None:
        return Verdict.yes(chain)
    if exhaustive:
        return Verdict.no("exhaustive forward search found no chain")
    return Verdict.unknown(f"state cap {caps.max_states} reached")


def oracle_leads_to(graph: Graph, a: Element, b: Element,
                    caps: SearchCaps = DEFAULT_CAPS) -> Verdict[list[RewriteStep]]:
    """``a -> b`` by search; a no is given only when the path-system test also refutes."""
    chain, exhaustive = search_chain(graph, a, b, caps)
    if chain is not None:
        return Verdict.yes(chain)
    exact = decide_arrow(graph, a, b)
    if exact.is_no:
        how = "exhaustive search and path systems" if exhaustive else "path systems"
        return Verdict.no(f"refuted by {how}")
    if exact.is_yes and exhaustive:
        raise AssertionError(f"search and path systems disagree on {a} -> {b}")
    return Verdict.unknown("search capped and path systems inconclusive")


# -- equivalence --------------------------------------------------------------

@dataclass
class Common:
    """A common reduct ``c`` of two elements, with both chains."""

    common: Element
    chain_a: list[RewriteStep]
    chain_b: list[RewriteStep]

    def to_json(self) -> dict:
        return {"common": str(self.common),
                "chain_a": [s.to_json() for s in self.chain_a],
                "chain_b": [s.to_json() for s in self.chain_b]}


def level_form(graph: Graph, a: Element, level: int,
               max_monomials: int = 64) -> tuple[Element, list[RewriteStep]] | None:
    """Expand every regular monomial of degree below ``level`` by A1.

    The result does not depend on the order of expansion.  Returns ``None``
    if the element outgrows ``max_monomials``.
    """
    chain: list[RewriteStep] = []
    while True:
        todo = [(d, g) for (d, g), _ in a.terms
                if d < level and isinstance(g, Proper) and graph.is_regular(g.vertex)]
        if not todo:
            return a, chain
        step = RewriteStep("A1", *todo[0])
        a = expand(graph, a, step)
        chain.append(step)
        if len(a) > max_monomials:
            return None


def _persistent(graph: Graph, m: Monomial) -> bool:
    g = m[1]
    return isinstance(g, Improper) or not graph.is_regular(g.vertex)


def _unmatched(graph: Graph, x: Element, y: Element) -> str | None:
    """A persistent monomial of ``x`` that no reduct of ``y`` can match, if any.

    A monomial at a sink, an infinite emitter or an improper vertex leaves a
    monomial at the same vertex and degree in every reduct.
    """
    for m, _ in x.terms:
        if not _persistent(graph, m):
            continue
        d, g = m
        probe = g if isinstance(g, Proper) and graph.is_sink(g.vertex) else None
        ok = False
        for (k, h), _ in y.terms:
            if k > d:
                continue
            if probe is not None:
                if _can_descend(graph, (k, h), Element.mono(probe, d)):
                    ok = True
                    break
                continue
            if k == d and h.vertex == g.vertex:
                ok = True
                break
            if k < d and any(g.vertex in graph.walks(r, d - k - 1) for r in first_ranges(graph, h)):
                if not (isinstance(h, Proper) and graph.is_sink(h.vertex)):
                    ok = True
                    break
        if not ok:
            return f"{format_monomial(m)} persists and cannot arise from the other side"
    return None


def obstruction(graph: Graph, a: Element, b: Element) -> str | None:
    """A reason why ``a`` and ``b`` can have no common reduct, if a simple one exists.

    Each persistent monomial of either side must be producible by the other.
    """
    return _unmatched(graph, a, b) or _unmatched(graph, b, a)


def _strip(x: Element, y: Element) -> tuple[Element, Element]:
    cy = y.counts()
    shared = Element({m: min(c, cy[m]) for m, c in x.terms if m in cy})
    return x - shared, y - shared


def _paired(graph: Graph, a: Element, b: Element, caps: SearchCaps, goal, dead):
    """Best-first search over pairs of reducts, dropping the shared part after each step.

    Returns the two chains once ``goal`` accepts the stripped pair.
    """
    start = _strip(a, b)
    parent: dict = {start: None}
    heap = [(len(start[0]) + len(start[1]), 0, 0, start)]
    tick = 0
    while heap and len(parent) < caps.max_states:
        _, depth, _, state = heapq.heappop(heap)
        if goal(state):
            chains: tuple[list, list] = ([], [])
            while parent[state] is not None:
                state, side, step = parent[state]
                chains[side].append(step)
            return chains[0][::-1], chains[1][::-1]
        if depth >= caps.max_depth or dead(state):
            continue
        for side in (0, 1):
            for step, nxt in successors(graph, state[side], caps)[0]:
                new = _strip(nxt, state[1]) if side == 0 else _strip(state[0], nxt)
                if new in parent:
                    continue
                parent[new] = (state, side, step)
                tick += 1
                heapq.heappush(heap, (len(new[0]) + len(new[1]), depth + 1, tick, new))
    return None


def paired_search(graph: Graph, a: Element, b: Element,
                  caps: SearchCaps = DEFAULT_CAPS) -> Common | None:
    """A common reduct found by search over stripped pairs.

    If ``x -> d`` and ``y -> d`` then ``x + m -> d + m`` and ``y + m -> d + m``,
    so a common reduct of the stripped pair lifts to one of the original pair.
    """
    found = _paired(graph, a, b, caps,
                    goal=lambda st: st[0].is_zero and st[1].is_zero,
                    dead=lambda st: st[0].is_zero or st[1].is_zero or obstruction(graph, *st) is not None)
    if found is None:
        return None
    ca, cb = found
    c = replay(graph, a, ca)
    if c != replay(graph, b, cb):  # pragma: no cover - internal consistency
        raise AssertionError("paired chains do not meet")
    return Common(c, ca, cb)


def oracle_equivalent(graph: Graph, a: Element, b: Element,
                      caps: SearchCaps = DEFAULT_CAPS, strip: bool = True) -> Verdict[Common]:
    """Decide ``a ~ b`` (a common reduct exists) within caps.

    ``strip`` enables :func:`paired_search`; it treats ``a + c`` and ``b + c``
    alike with ``a`` and ``b``, so tests of cancellation switch it off.
    """
    if a == b:
        return Verdict.yes(Common(a, [], []))
    if a.is_zero or b.is_zero:
        return Verdict.no("exactly one side is zero")
    why = obstruction(graph, a, b)
    if why:
        return Verdict.no(why)
    top = max(a.degrees()[1], b.degrees()[1])
    for level in range(top, top + caps.max_depth + 1):
        fa = level_form(graph, a, level, caps.max_monomials)
        fb = level_form(graph, b, level, caps.max_monomials)
        if fa is None or fb is None:
            break
        if fa[0] == fb[0]:
            return Verdict.yes(Common(fa[0], fa[1], fb[1]))
        for (x, fx), (y, fy), flip in (((a, fa), (b, fb), False), ((b, fb), (a, fa), True)):
            v = decide_arrow(graph, y, fx[0])
            if v.is_yes:
                cy = list(v.witness.chain)
                return Verdict.yes(Common(fx[0], cy, fx[1]) if flip else Common(fx[0], fx[1], cy))
    if strip:
        found = paired_search(graph, a, b, replace(caps, max_states=min(caps.max_states, 4000)))
        if found is not None:
            return Verdict.yes(found)
    half = replace(caps, max_states=max(caps.max_states // 2, 1))
    ea = explore(graph, a, half)
    eb = explore(graph, b, half)
    shared = sorted(set(ea.parent) & set(eb.parent))
    if shared:
        c = shared[0]
        return Verdict.yes(Common(c, ea.chain_to(c), eb.chain_to(c)))
    for ex, other, flip in ((ea, b, False), (eb, a, True)):
        for c in sorted(ex.parent, key=lambda e: (ex.depth[e], e.sort_key()))[:400]:
            v = decide_arrow(graph, other, c)
            if v.is_yes:
                mine, theirs = ex.chain_to(c), list(v.witness.chain)
                return Verdict.yes(Common(c, theirs, mine) if flip else Common(c, mine, theirs))
    for ex, other in ((ea, b), (eb, a)):
        if ex.exhaustive and len(ex.parent) <= 400:
            return Verdict.no("every reduct of one side was checked against the other")
    return Verdict.unknown(f"no common reduct within caps {caps}")


# -- the pre-order --------------------------------------------------------------

@dataclass
class LeqWitness:
    """``a + remainder ~ b``: ``b -> reduct`` and ``a -> reduct - remainder``."""

    reduct: Element
    chain_b: list[RewriteStep]
    chain_a: list[RewriteStep]
    remainder: Element

    def to_json(self) -> dict:
        return {"reduct": str(self.reduct), "remainder": str(self.remainder),
                "chain_b": [s.to_json() for s in self.chain_b],
                "chain_a": [s.to_json() for s in self.chain_a]}


def oracle_leq(graph: Graph, a: Element, b: Element, caps: SearchCaps = DEFAULT_CAPS,
               strict: bool = False) -> Verdict[LeqWitness]:
    """Decide ``a + c ~ b`` for some ``c`` (``c != 0`` when ``strict``).

    A persistent monomial of ``a`` that ``b`` cannot produce refutes at once.
    Otherwise a search over stripped pairs stops once the ``a`` side is
    used up.  Then a scan using: ``a <~ b`` iff some reduct ``e`` of ``b``
    has a sub-multiset ``e'`` with ``a -> e'``, and ``c = e - e'``.
    """
    if a.is_zero:
        if strict and b.is_zero:
            return Verdict.no("0 is not strictly below 0")
        return Verdict.yes(LeqWitness(b, [], [], b))
    if b.is_zero:
        return Verdict.no("nonzero element below 0")
    why = _unmatched(graph, a, b)
    if why:
        return Verdict.no(why)
    found = _paired(graph, a, b, replace(caps, max_states=min(caps.max_states, 4000)),
                    goal=lambda st: st[0].is_zero and not (strict and st[1].is_zero),
                    dead=lambda st: st[1].is_zero)
    if found is not None:
        ca, cb = found
        e = replay(graph, b, cb)
        return Verdict.yes(LeqWitness(e, cb, ca, e - replay(graph, a, ca)))
    ex = explore(graph, b, caps)
    for e in sorted(ex.parent, key=lambda s: (ex.depth[s], s.sort_key())):
        if len(e) < len(a) or not all(_can_descend(graph, m, e) for m, _ in a.terms):
            continue
        v = decide_within(graph, a, e, strict=strict)
        if v.is_yes:
            rem = e - used_part(v.witness)
            return Verdict.yes(LeqWitness(e, ex.chain_to(e), list(v.witness.chain), rem))
        if v.is_unknown:
            return Verdict.unknown(v.reason)
    if ex.exhaustive:
        return Verdict.no("no reduct of the right side contains a reduct of the left")
    return Verdict.unknown(f"capped: {', '.join(sorted(ex.reasons))}")


def brute_force_leq(graph: Graph, a: Element, b: Element, caps: SearchCaps = DEFAULT_CAPS,
                    strict: bool = False) -> Verdict[LeqWitness]:
    """``a <~ b`` by forward search alone: some reduct of ``a`` inside some reduct of ``b``.

    Complete for bounded explorations: a common reduct of ``a + c`` and ``b``
    splits into a reduct of ``a`` plus a reduct of ``c``.
    """
    ea, eb = explore(graph, a, caps), explore(graph, b, caps)
    right = sorted(eb.parent, key=lambda s: (eb.depth[s], s.sort_key()))
    holding: dict = {}
    for k, e in enumerate(right):
        for m, c in e.terms:
            holding.setdefault(m, []).append((c, k))
    for f in sorted(ea.parent, key=lambda s: (ea.depth[s], s.sort_key())):
        cand = None
        for m, c in f.terms:
            here = {k for cc, k in holding.get(m, ()) if cc >= c}
            cand = here if cand is None else cand & here
            if not cand:
                break
        for k in sorted(cand or ()):
            e = right[k]
            if not (strict and len(e) == len(f)):
                return Verdict.yes(LeqWitness(e, eb.chain_to(e), ea.chain_to(f), e - f))
    if ea.exhaustive and eb.exhaustive:
        return Verdict.no("no explored reduct of the left lies inside one of the right")
    return Verdict.unknown(f"capped: {', '.join(sorted(ea.reasons | eb.reasons))}")


# -- refinement -----------------------------------------------------------------

def check_refinement(graph: Graph, a1: Element, a2: Element, b: Element,
                     chain: list[RewriteStep]) -> tuple[Element, Element, int, int]:
    """Split a chain ``a1 + a2 -> b`` into ``a1 -> b1`` (i steps) and ``a2 -> b2`` (j steps).

    Each step is charged to the part owning the rewritten monomial; if both
    parts own a copy, the first part is charged.
    """
    parts = [a1, a2]
    used = [0, 0]
    for step in chain:
        m = step.monomial
        k = 0 if parts[0].count(m) else 1
        if not parts[k].count(m):
            raise ValueError(f"step {step} does not apply")
        parts[k] = expand(graph, parts[k], step)
        used[k] += 1
    if parts[0] + parts[1] != b:
        raise ValueError("chain does not end at b")
    return parts[0], parts[1], used[0], used[1]


__all__ = [
    "Common", "LeqWitness", "brute_force_arrow", "brute_force_leq", "check_refinement", "level_form",
    "obstruction", "oracle_equivalent", "paired_search", "oracle_leads_to", "oracle_leq", "search_chain",
]
