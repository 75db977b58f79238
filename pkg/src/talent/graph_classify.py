"""Whole-graph predicates and the invariant comparator."""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, fields

import networkx as nx

from .graph import OMEGA, Graph, all_cycles, cycle_has_exit, reachable


# -- cycle conditions ----------------------------------------------------------

def has_cycle(g: Graph) -> bool:
    return any(g.on_cycle(v) for v in g.vertices)


def is_acyclic(g: Graph) -> bool:
    return not has_cycle(g)


def condition_L(g: Graph) -> bool:
    """Every cycle has an exit."""
    return all(cycle_has_exit(g, c) for c in all_cycles(g))


def condition_NE(g: Graph) -> bool:
    """No cycle has an exit: every vertex on a cycle emits exactly one edge."""
    return all(sum(grp.mult for grp in g.out_groups(v)) == 1
               for v in g.vertices if g.on_cycle(v))


def has_exit_cycle(g: Graph) -> bool:
    return any(cycle_has_exit(g, c) for c in all_cycles(g))


def has_noexit_cycle(g: Graph) -> bool:
    return any(not cycle_has_exit(g, c) for c in all_cycles(g))


def _without(g: Graph, v: str, start) -> frozenset[str]:
    seen = set(start) - {v}
    stack = list(seen)
    while stack:
        u = stack.pop()
        for r in g.successors(u):
            if r != v and r not in seen:
                seen.add(r)
                stack.append(r)
    return frozenset(seen)


def first_return_count(g: Graph, v: str, cap: int = 2) -> float:
    """Number of closed paths at ``v`` not meeting ``v`` inside, capped at ``cap``.

    Paths run through the region reachable from ``v`` and leading back to it
    while avoiding ``v``; a cycle inside that region can be pumped, giving
    infinitely many.
    """
    succ = {grp.range for grp in g.out_groups(v)} - {v}
    fwd = _without(g, v, succ)
    preds = {grp.source for grp in g.in_groups(v)} - {v}
    back: set[str] = set(preds)
    stack = list(preds)
    while stack:
        u = stack.pop()
        for grp in g.in_groups(u):
            if grp.source != v and grp.source not in back:
                back.add(grp.source)
                stack.append(grp.source)
    region = fwd & back
    loops = sum(grp.mult for grp in g.out_groups(v) if grp.range == v)
    if not region:
        return min(loops, cap)
    for z in region:
        if any(r in region and z in _without(g, v, [r]) for r in g.successors(z)):
            return cap
    memo: dict[str, float] = {}

    def paths_home(z: str) -> float:
        if z not in memo:
            total = 0.0
            for grp in g.out_groups(z):
                if grp.range == v:
                    total += grp.mult
                elif grp.range in region:
                    total += grp.mult * paths_home(grp.range)
            memo[z] = total
        return memo[z]

    count = loops + sum(grp.mult * paths_home(grp.range)
                        for grp in g.out_groups(v) if grp.range in region)
    return min(count, cap)


def condition_K(g: Graph) -> bool:
    """Every vertex on a closed simple path has at least two of them."""
    return all(first_return_count(g, v) >= 2 for v in g.vertices if g.on_cycle(v))


def closed_simple_paths(g: Graph, v: str, max_len: int, cap: int = 2) -> int:
    """Brute-force count (capped) of closed simple paths at ``v`` of length <= ``max_len``."""
    found = 0

    def dfs(u: str, depth: int) -> None:
        nonlocal found
        for grp in g.out_groups(u):
            copies = int(min(grp.mult, cap))
            for _ in range(copies):
                if found >= cap:
                    return
                if grp.range == v:
                    found += 1
                elif depth + 1 < max_len:
                    dfs(grp.range, depth + 1)

    dfs(v, 0)
    return found


def condition_K_bruteforce(g: Graph, max_len: int | None = None) -> bool:
    max_len = 2 * len(g.vertices) if max_len is None else max_len
    return all(closed_simple_paths(g, v, max_len) >= 2 for v in g.vertices if g.on_cycle(v))


# -- hereditary saturated sets and admissible pairs -------------------------------

def is_hereditary(g: Graph, H) -> bool:
    H = set(H)
    return all(r in H for v in H for r in g.successors(v))


def is_saturated(g: Graph, H) -> bool:
    H = set(H)
    return not any(v not in H and g.is_regular(v) and g.successors(v) <= H for v in g.vertices)


def hereditary_saturated_closure(g: Graph, S) -> frozenset[str]:
    H = set(reachable(g, S))
    changed = True
    while changed:
        changed = False
        for v in g.vertices:
            if v not in H and g.is_regular(v) and g.successors(v) <= H:
                H.add(v)
                changed = True
    return frozenset(H)


def hereditary_saturated_sets(g: Graph) -> list[frozenset[str]]:
    vs = g.vertices
    if len(vs) > 16:
        raise ValueError("too many vertices to enumerate hereditary saturated sets")
    found = {hereditary_saturated_closure(g, s)
             for k in range(len(vs) + 1) for s in itertools.combinations(vs, k)}
    return sorted(found, key=lambda h: (len(h), sorted(h)))


def breaking_vertices(g: Graph, H) -> frozenset[str]:
    """``G(H)``: infinite emitters outside ``H`` with finitely many (but some) edges leaving ``H``'s complement."""
    H = set(H)
    out = set()
    for v in g.vertices:
        if v in H or g.is_regular(v):
            continue
        k = sum(grp.mult for grp in g.out_groups(v) if grp.range not in H)
        if 0 < k < OMEGA:
            out.add(v)
    return frozenset(out)


@dataclass(frozen=True)
class AdmissiblePair:
    H: frozenset
    G: frozenset

    def __le__(self, other: AdmissiblePair) -> bool:
        return self.H <= other.H and self.G <= (other.G | other.H)

    def label(self) -> str:
        h = ",".join(sorted(self.H))
        s = ",".join(sorted(self.G))
        return f"({{{h}}},{{{s}}})"


def enumerate_admissible_pairs(g: Graph) -> list[AdmissiblePair]:
    pairs = []
    for H in hereditary_saturated_sets(g):
        B = sorted(breaking_vertices(g, H))
        for k in range(len(B) + 1):
            for S in itertools.combinations(B, k):
                pairs.append(AdmissiblePair(H, frozenset(S)))
    return pairs


@dataclass
class Lattice:
    pairs: list[AdmissiblePair]
    covers: list[tuple[int, int]]
    form: str

    @property
    def size(self) -> int:
        return len(self.pairs)

    def to_json(self) -> dict:
        return {"pairs": [p.label() for p in self.pairs], "covers": [list(c) for c in self.covers],
                "form": self.form}


def _covers(n: int, leq) -> list[tuple[int, int]]:
    res = []
    for i in range(n):
        for j in range(n):
            if i != j and leq(i, j) and not any(k not in (i, j) and leq(i, k) and leq(k, j)
                                                  for k in range(n)):
                res.append((i, j))
    return res


def _linear_extensions(n: int, covers: list[tuple[int, int]]):
    preds = {j: {i for i, jj in covers if jj == j} for j in range(n)}

    def rec(order: list[int], placed: set[int]):
        if len(order) == n:
            yield list(order)
            return
        for j in range(n):
            if j not in placed and preds[j] <= placed:
                order.append(j)
                placed.add(j)
                yield from rec(order, placed)
                placed.discard(j)
                order.pop()

    yield from rec([], set())


EXACT_FORM_LIMIT = 8


def canonical_form(n: int, covers: list[tuple[int, int]]) -> str:
    """Isomorphism-invariant label of a Hasse diagram.

    Small posets get the lexicographically least cover list over all linear
    extensions (a complete invariant); larger ones a Weisfeiler-Lehman hash.
    """
    if n <= EXACT_FORM_LIMIT:
        best = None
        for order in _linear_extensions(n, covers):
            pos = {v: k for k, v in enumerate(order)}
            form = tuple(sorted((pos[i], pos[j]) for i, j in covers))
            if best is None or form < best:
                best = form
        return f"n{n}:" + ";".join(f"{i}<{j}" for i, j in best)
    dg = nx.DiGraph()
    dg.add_nodes_from(range(n))
    dg.add_edges_from(covers)
    return f"n{n}:wl:" + nx.weisfeiler_lehman_graph_hash(dg)


def admissible_lattice(g: Graph) -> Lattice:
    pairs = enumerate_admissible_pairs(g)
    n = len(pairs)
    covers = _covers(n, lambda i, j: pairs[i] <= pairs[j])
    return Lattice(pairs, covers, canonical_form(n, covers))


# -- whole-graph classes ---------------------------------------------------------

def _good_vertices(g: Graph) -> set[str]:
    good = {v for v in g.vertices if g.on_cycle(v)}
    changed = True
    while changed:
        changed = False
        for v in g.vertices:
            if v not in good and g.is_regular(v) and g.successors(v) <= good:
                good.add(v)
                changed = True
    return good


def vertex_comparability_condition(g: Graph) -> bool:
    """No sinks, every vertex connects to a cycle, every infinite emitter is on a cycle."""
    if g.sinks:
        return False
    cyc = {v for v in g.vertices if g.on_cycle(v)}
    if not all(reachable(g, [v]) & cyc for v in g.vertices):
        return False
    return all(g.on_cycle(v) for v in g.infinite_emitters)


def improper_on_cycles(g: Graph) -> bool:
    """Every improper vertex lies on a cycle.

    For an emitter ``v`` this holds for all finite ``Z`` exactly when an
    infinite group out of ``v`` leads back to ``v``.
    """
    return all(any(grp.infinite and g.reaches(grp.range, v) for grp in g.out_groups(v))
               for v in g.infinite_emitters)


def all_comparable_check(g: Graph) -> bool:
    """Every element is comparable.

    Proper vertices: each is on a cycle or is regular with all successors
    of that kind.  Improper vertices: each must lie on a cycle, which the
    vertex condition alone does not ensure when ``Z`` can swallow every edge
    of an emitter that leads back to it.
    """
    good = _good_vertices(g)
    if (good == set(g.vertices)) != vertex_comparability_condition(g):  # pragma: no cover
        raise AssertionError("vertex recursion and vertex condition disagree")
    return good == set(g.vertices) and improper_on_cycles(g)


def all_periodic_check(g: Graph) -> bool:
    return g.is_row_finite() and not g.sinks and condition_NE(g)


@dataclass
class InvariantVector:
    has_cycle: bool
    acyclic: bool
    has_noexit_cycle: bool
    has_exit_cycle: bool
    condition_L: bool
    condition_K: bool
    condition_NE: bool
    all_comparable: bool
    all_periodic: bool
    all_aperiodic: bool
    graded_simple: bool
    simple: bool
    purely_infinite_simple: bool
    lattice_size: int
    lattice_form: str

    def table(self) -> dict[str, bool]:
        """The element-class rows read off the graph conditions."""
        return {
            "exists_comparable": self.has_cycle,
            "all_incomparable": self.acyclic,
            "exists_periodic": self.has_noexit_cycle,
            "exists_aperiodic": self.has_exit_cycle,
            "all_comparable": self.all_comparable,
            "all_periodic": self.all_periodic,
            "all_aperiodic": self.all_aperiodic,
            "no_periodic": self.condition_L,
            "no_aperiodic": self.condition_NE,
        }

    def to_json(self) -> dict:
        return {**asdict(self), "table": self.table()}


def simplicity(g: Graph, lattice: Lattice | None = None) -> dict[str, bool]:
    lattice = admissible_lattice(g) if lattice is None else lattice
    graded = lattice.size == 2
    simple = graded and condition_L(g)
    return {"graded_simple": graded, "simple": simple,
            "purely_infinite_simple": simple and has_exit_cycle(g)}


def table_row_predicates(g: Graph) -> InvariantVector:
    lattice = admissible_lattice(g)
    simp = simplicity(g, lattice)
    comparable = all_comparable_check(g)
    L = condition_L(g)
    return InvariantVector(
        has_cycle=has_cycle(g), acyclic=is_acyclic(g),
        has_noexit_cycle=has_noexit_cycle(g), has_exit_cycle=has_exit_cycle(g),
        condition_L=L, condition_K=condition_K(g), condition_NE=condition_NE(g),
        all_comparable=comparable, all_periodic=all_periodic_check(g),
        all_aperiodic=comparable and L, lattice_size=lattice.size, lattice_form=lattice.form,
        **simp)


# -- quotients ------------------------------------------------------------------

def quotient_by_H(g: Graph, H) -> Graph:
    """The graph on the vertices outside ``H`` (``H`` hereditary and saturated)."""
    H = frozenset(H)
    if not H <= set(g.vertices) or not is_hereditary(g, H) or not is_saturated(g, H):
        raise ValueError(f"{sorted(H)} is not hereditary and saturated")
    keep = [v for v in g.vertices if v not in H]
    edges = [(grp.source, grp.range, grp.mult) for grp in g.groups
             if grp.source not in H and grp.range not in H]
    return Graph.build(keep, edges)


def condition_K_via_quotients(g: Graph) -> bool:
    """Condition (L) on every quotient by a hereditary saturated set (row-finite graphs)."""
    if not g.is_row_finite():
        raise ValueError("quotients by hereditary saturated sets alone need a row-finite graph")
    return all(condition_L(quotient_by_H(g, H)) for H in hereditary_saturated_sets(g))


# -- comparison -------------------------------------------------------------------

PRESERVED = {
    "has_cycle": "having a cycle (some element is comparable)",
    "acyclic": "acyclicity (every nonzero element is incomparable)",
    "has_noexit_cycle": "having a cycle without exits (some element is periodic)",
    "has_exit_cycle": "having a cycle with an exit (some element is aperiodic)",
    "condition_L": "Condition (L) (no nonzero element is periodic)",
    "condition_K": "Condition (K) (no quotient by an order-ideal has periodic elements)",
    "condition_NE": "Condition (NE) (no element is aperiodic)",
    "all_comparable": "every element being comparable",
    "all_periodic": "every element being periodic",
    "all_aperiodic": "every nonzero element being aperiodic",
    "graded_simple": "having exactly two order-ideals",
    "simple": "simplicity of the order-ideal lattice together with Condition (L)",
    "purely_infinite_simple": "pure infiniteness with simplicity",
    "lattice_size": "the number of order-ideals",
    "lattice_form": "the shape of the order-ideal lattice",
}


@dataclass
class Comparison:
    verdict: str
    mismatches: list[dict]
    left: InvariantVector
    right: InvariantVector

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "mismatches": self.mismatches,
                "left": self.left.to_json(), "right": self.right.to_json()}


def compare_invariants(g1: Graph, g2: Graph) -> Comparison:
    """Compare invariants preserved by Γ-monoid isomorphisms."""
    a, b = table_row_predicates(g1), table_row_predicates(g2)
    mism = []
    for f in fields(InvariantVector):
        x, y = getattr(a, f.name), getattr(b, f.name)
        if x != y:
            mism.append({"invariant": f.name, "left": x, "right": y,
                         "preserved": PRESERVED[f.name]})
    verdict = "necessarily non-isomorphic" if mism else "inconclusive"
    return Comparison(verdict, mism, a, b)


__all__ = [
    "AdmissiblePair", "Comparison", "InvariantVector", "Lattice", "admissible_lattice",
    "all_comparable_check", "all_periodic_check", "breaking_vertices", "canonical_form",
    "closed_simple_paths", "compare_invariants", "condition_K", "condition_K_bruteforce",
    "condition_K_via_quotients", "condition_L", "condition_NE", "enumerate_admissible_pairs",
    "first_return_count", "has_cycle", "has_exit_cycle", "has_noexit_cycle",
    "hereditary_saturated_closure", "hereditary_saturated_sets", "improper_on_cycles",
    "is_acyclic", "is_hereditary", "is_saturated", "quotient_by_H", "simplicity",
    "table_row_predicates", "vertex_comparability_condition",
]
