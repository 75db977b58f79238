"""Stationary, periodic, aperiodic and incomparable elements.

An element ``a`` is stationary if ``a -> x^n a + b`` for some ``n > 0``,
comparable if ``x^n a <~ a`` for some ``n > 0``, periodic if ``a ~ x^n a``
for some ``n > 0``, and aperiodic if it is comparable but not periodic.
Comparable elements are exactly those with a stationary reduct.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .connectivity import (PathSystem, connects_any, decide_contains, first_ranges,
                           min_cycle_length, on_cycle, validate_path_system)
from .element import Element, Generator, Improper, Proper, gen_key, shift, support, total
from .graph import Graph, cycles_through, reachable
from .oracle import Common, oracle_equivalent
from .rewrite import (DEFAULT_CAPS, RewriteStep, SearchCaps, Verdict, expand, explore, replay,
                      shift_chain)


class NotStationary(ValueError):
    pass


# -- supports ---------------------------------------------------------------

def stationary_support(graph: Graph, gens: Iterable[Generator]) -> bool:
    """Every generator lies on a cycle or is reached from another one that does."""
    gens = list(gens)
    if not gens:
        raise ValueError("empty support")
    core = [g for g in gens if on_cycle(graph, g)]
    return all(g in core or any(connects_any(graph, h, g) for h in core) for g in gens)


@dataclass
class CoreDecomposition:
    core: Element
    exit: Element
    core_generators: tuple[Generator, ...]
    exit_generators: tuple[Generator, ...]
    cycle_lengths: dict[Generator, int]
    period: int


def core_exit_split(graph: Graph, a: Element) -> CoreDecomposition:
    gens = sorted(support(a), key=gen_key)
    if a.is_zero or not stationary_support(graph, gens):
        raise NotStationary(f"support of {a} is not stationary")
    core_gens = tuple(g for g in gens if on_cycle(graph, g))
    exit_gens = tuple(g for g in gens if g not in core_gens)
    lengths = {g: min_cycle_length(graph, g) for g in core_gens}
    core = Element({m: c for m, c in a.terms if m[1] in core_gens})
    return CoreDecomposition(core, a - core, core_gens, exit_gens, lengths,
                             math.lcm(*lengths.values()))


# -- stationarity -------------------------------------------------------------

@dataclass
class StationaryPartition:
    """Paths of positive length from the monomials of ``a`` onto ``x^n a``."""

    element: Element
    n: int
    system: PathSystem

    @property
    def partition(self) -> tuple[tuple[int, ...], ...]:
        return self.system.partition

    @property
    def rest(self) -> Element:
        return self.system.rest

    def to_json(self, graph: Graph | None = None) -> dict:
        return {"n": self.n, **self.system.to_json(graph)}


def validate_stationary_partition(graph: Graph, sp: StationaryPartition) -> tuple[bool, str]:
    sys_ = sp.system
    if sp.n <= 0:
        return False, "n must be positive"
    if sys_.source != sp.element or sys_.target != shift(sp.element, sp.n):
        return False, "system does not map a onto x^n a"
    if any(p.length == 0 for p in sys_.paths.values()):
        return False, "paths must have positive length"
    return validate_path_system(graph, sys_, "tree", complete=False)


def n_schedule(graph: Graph, a: Element, n_max: int | None = None) -> list[int]:
    """Candidate exponents: multiples of the core period up to ``n_max``.

    The default bound is ``period * (1 + degree spread + number of monomials)``.
    """
    dec = core_exit_split(graph, a)
    q = dec.period
    if n_max is None:
        lo, hi = a.degrees()
        n_max = q * (1 + (hi - lo) + len(a))
    return list(range(q, n_max + 1, q))


def find_stationary_partition(graph: Graph, a: Element,
                              n_max: int | None = None) -> Verdict[StationaryPartition]:
    if a.is_zero:
        raise ValueError("zero element")
    if not stationary_support(graph, support(a)):
        return Verdict.no("support is not stationary")
    schedule = n_schedule(graph, a, n_max)
    for n in schedule:
        v = decide_contains(graph, a, shift(a, n), min_depth=1)
        if v.is_yes:
            return Verdict.yes(StationaryPartition(a, n, v.witness))
    return Verdict.unknown(f"no stationary partition for n in {schedule}")


@dataclass
class Stationarity:
    """``a -> x^n a + rest`` by ``chain``."""

    element: Element
    n: int
    rest: Element
    chain: tuple[RewriteStep, ...]
    partition: StationaryPartition | None = None

    def pumped(self, k: int) -> list[RewriteStep]:
        """A chain ``a -> x^(kn) a + sum_{i<k} x^(in) rest``."""
        chain: list[RewriteStep] = []
        for i in range(k):
            chain += shift_chain(self.chain, i * self.n)
        return chain

    def pumped_result(self, k: int) -> Element:
        return shift(self.element, k * self.n) + total(shift(self.rest, i * self.n) for i in range(k))

    def to_json(self) -> dict:
        return {"n": self.n, "rest": str(self.rest), "chain": [s.to_json() for s in self.chain]}


def is_stationary(graph: Graph, a: Element, n_max: int | None = None) -> Verdict[Stationarity]:
    if a.is_zero:
        raise ValueError("zero element")
    found = find_stationary_partition(graph, a, n_max)
    if found.is_yes:
        sp = found.witness
        return Verdict.yes(Stationarity(a, sp.n, sp.rest, sp.system.chain, sp))
    return Verdict(found.status, None, found.reason)


def search_stationary(graph: Graph, a: Element, caps: SearchCaps = DEFAULT_CAPS,
                      n_max: int = 4) -> Verdict[Stationarity]:
    """Look for ``a -> x^n a + b`` (``1 <= n <= n_max``) among the explored reducts of ``a``."""
    ex = explore(graph, a, caps)
    for e in sorted(ex.parent, key=lambda s: (ex.depth[s], s.sort_key())):
        for n in range(1, n_max + 1):
            t = shift(a, n)
            if e.contains(t):
                return Verdict.yes(Stationarity(a, n, e - t, tuple(ex.chain_to(e))))
    if ex.exhaustive:
        return Verdict.no("no reduct contains a shift of the element")
    return Verdict.unknown(f"no reduct within caps contains x^n a for n <= {n_max}")


# -- periodicity ----------------------------------------------------------------

def _periodic_region(graph: Graph, a: Element) -> frozenset[str] | None:
    for (_, g), _ in a.terms:
        if not isinstance(g, Proper) or not graph.is_regular(g.vertex):
            return None
    region = reachable(graph, [g.vertex for g in support(a)])
    for u in region:
        if not graph.is_regular(u):
            return None
        if graph.on_cycle(u) and sum(grp.mult for grp in graph.out_groups(u)) != 1:
            return None
    return region


def is_periodic(graph: Graph, a: Element) -> bool:
    """Complete test: every path from the support stays regular and ends in exitless cycles."""
    return a.is_zero or _periodic_region(graph, a) is not None


@dataclass
class PeriodWitness:
    """``a -> settled -> x^n settled`` and ``x^n a -> x^n settled``."""

    n: int
    settled: Element
    to_settled: tuple[RewriteStep, ...]
    rotation: tuple[RewriteStep, ...]

    @property
    def common(self) -> Element:
        return shift(self.settled, self.n)

    def to_json(self) -> dict:
        return {"n": self.n, "settled": str(self.settled), "common": str(self.common),
                "chain_a": [s.to_json() for s in self.to_settled + self.rotation],
                "chain_shift": [s.to_json() for s in shift_chain(self.to_settled, self.n)]}


def periodic_period(graph: Graph, a: Element) -> PeriodWitness:
    if a.is_zero:
        raise ValueError("zero element")
    region = _periodic_region(graph, a)
    if region is None:
        raise ValueError(f"{a} is not periodic")
    lengths = {c.length for u in region for c in cycles_through(graph, u)}
    n = math.lcm(*lengths)
    chain: list[RewriteStep] = []
    e = a
    while True:
        todo = [m for m, _ in e.terms if not graph.on_cycle(m[1].vertex)]
        if not todo:
            break
        step = RewriteStep("A1", *todo[0])
        chain.append(step)
        e = expand(graph, e, step)
    rotation: list[RewriteStep] = []
    cur = e
    for _ in range(n):
        for m, c in sorted(cur.terms, key=lambda mc: gen_key(mc[0][1])):
            for _ in range(c):
                step = RewriteStep("A1", *m)
                rotation.append(step)
        cur = replay(graph, cur, rotation[len(rotation) - len(cur):])
    return PeriodWitness(n, e, tuple(chain), tuple(rotation))


# -- comparability --------------------------------------------------------

@dataclass
class Comparability:
    """A stationary reduct: ``a -> reduct`` and ``reduct -> x^n reduct + rest``."""

    element: Element
    reduct: Element
    chain: tuple[RewriteStep, ...]
    stationarity: Stationarity

    @property
    def n(self) -> int:
        return self.stationarity.n

    def to_json(self) -> dict:
        return {"reduct": str(self.reduct), "chain": [s.to_json() for s in self.chain],
                "stationary": self.stationarity.to_json()}


def incomparability_certificate(graph: Graph, a: Element) -> str | None:
    """A reason why no reduct of ``a`` can be stationary, if a simple one exists.

    The core of a stationary reduct lies on cycles reachable from the support.
    A monomial at a sink, an infinite emitter or an improper vertex survives
    at its vertex in every reduct; unless it lies on a cycle it must be an
    exit, so some reachable cycle vertex must have a path to it.
    """
    gens = support(a)
    hosts: set[str] = set()
    for g in gens:
        if on_cycle(graph, g):
            hosts.add(g.vertex)
        seen = reachable(graph, first_ranges(graph, g)) | (
            {g.vertex} if isinstance(g, Proper) else set())
        hosts |= {u for u in seen if graph.on_cycle(u)}
    if not hosts:
        return "no cycle is reachable from the support"
    for g in sorted(gens, key=gen_key):
        stuck = isinstance(g, Improper) or not graph.is_regular(g.vertex)
        if not stuck or on_cycle(graph, g):
            continue
        if not any(graph.reaches(u, g.vertex) for u in hosts):
            return f"{g} cannot be stationary and no reachable cycle leads to it"
    return None


def _settle(graph: Graph, a: Element, max_steps: int) -> tuple[Element, list[RewriteStep]]:
    """Expand regular monomials off cycles until none is left (or steps run out)."""
    chain: list[RewriteStep] = []
    for _ in range(max_steps):
        todo = [m for m, _ in a.terms if isinstance(m[1], Proper) and graph.is_regular(m[1].vertex)
                and not graph.on_cycle(m[1].vertex)]
        if not todo:
            break
        step = RewriteStep("A1", *todo[0])
        chain.append(step)
        a = expand(graph, a, step)
    return a, chain


def is_comparable(graph: Graph, a: Element, caps: SearchCaps = DEFAULT_CAPS,
                  n_max: int | None = None, candidates: int = 60) -> Verdict[Comparability]:
    if a.is_zero:
        raise ValueError("zero element")
    why = incomparability_certificate(graph, a)
    if why:
        return Verdict.no(why)
    tried: set[Element] = set()

    def attempt(e: Element, chain) -> Verdict | None:
        if e in tried or len(e) > caps.max_monomials:
            return None
        tried.add(e)
        if not stationary_support(graph, support(e)):
            return None
        st = is_stationary(graph, e, n_max)
        if st.is_yes:
            return Verdict.yes(Comparability(a, e, tuple(chain), st.witness))
        return None

    for e, chain in ((a, []), _settle(graph, a, 4 * caps.max_monomials)):
        got = attempt(e, chain)
        if got:
            return got
    ex = explore(graph, a, caps)
    for e in sorted(ex.parent, key=lambda s: (ex.depth[s], s.sort_key())):
        if len(tried) > candidates:
            break
        got = attempt(e, ex.chain_to(e))
        if got:
            return got
    return Verdict.unknown("no stationary reduct found within caps")


def is_aperiodic(graph: Graph, a: Element, caps: SearchCaps = DEFAULT_CAPS,
                 n_max: int | None = None) -> Verdict[Comparability]:
    if a.is_zero or is_periodic(graph, a):
        return Verdict.no("periodic")
    comp = is_comparable(graph, a, caps, n_max)
    if comp.is_yes:
        return comp
    return Verdict(comp.status, None, comp.reason)


@dataclass
class ElementClass:
    label: str  # Zero | Periodic | Aperiodic | Incomparable | Unknown
    period: int | None = None
    witness: object = None
    reason: str = ""

    def __str__(self) -> str:
        return f"Periodic({self.period})" if self.label == "Periodic" else self.label

    def to_json(self) -> dict:
        out: dict = {"class": self.label, "reason": self.reason}
        if self.period is not None:
            out["period"] = self.period
        if self.witness is not None and hasattr(self.witness, "to_json"):
            out["witness"] = self.witness.to_json()
        return out


def classify_element(graph: Graph, a: Element, caps: SearchCaps = DEFAULT_CAPS,
                     n_max: int | None = None) -> ElementClass:
    if a.is_zero:
        return ElementClass("Zero")
    if is_periodic(graph, a):
        w = periodic_period(graph, a)
        return ElementClass("Periodic", w.n, w)
    comp = is_comparable(graph, a, caps, n_max)
    if comp.is_yes:
        return ElementClass("Aperiodic", None, comp.witness, "comparable and not periodic")
    if comp.is_no:
        return ElementClass("Incomparable", None, None, comp.reason)
    return ElementClass("Unknown", None, None, comp.reason)


# -- the core lemma ---------------------------------------------------------

@dataclass
class CoreLemmaWitness:
    k: int
    c: Element
    core_chain: tuple[RewriteStep, ...]
    common: Common


def verify_core_lemma(graph: Graph, st: Stationarity, caps: SearchCaps = DEFAULT_CAPS,
                      k_max: int = 4) -> Verdict[CoreLemmaWitness]:
    """Find ``k`` and ``c`` with ``a_c -> x^(kn) a + c`` and ``c + a_e ~ sum_{i<k} x^(in) b``."""
    a, n, b = st.element, st.n, st.rest
    if replay(graph, a, st.chain) != shift(a, n) + b:
        raise ValueError("stationarity witness does not replay")
    dec = core_exit_split(graph, a)
    pending = []
    for k in range(1, k_max + 1):
        found = decide_contains(graph, dec.core, shift(a, k * n))
        if not found.is_yes:
            continue
        c = found.witness.rest
        rhs = total(shift(b, i * n) for i in range(k))
        eq = oracle_equivalent(graph, c + dec.exit, rhs, caps)
        if eq.is_yes:
            return Verdict.yes(CoreLemmaWitness(k, c, found.witness.chain, eq.witness))
        pending.append(f"k={k}: {eq.status.value}")
    return Verdict.unknown("; ".join(pending) or f"a_c does not reach x^(kn) a + c for k <= {k_max}")


__all__ = [
    "Comparability", "CoreDecomposition", "CoreLemmaWitness", "ElementClass", "NotStationary",
    "PeriodWitness", "Stationarity", "StationaryPartition", "classify_element", "core_exit_split",
    "find_stationary_partition", "incomparability_certificate", "is_aperiodic", "is_comparable",
    "is_periodic", "is_stationary", "n_schedule", "periodic_period", "search_stationary",
    "stationary_support", "validate_stationary_partition", "verify_core_lemma",
]
