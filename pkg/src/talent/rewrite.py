"""One-step rewriting by the three axioms and bounded forward exploration.

For a monomial ``x^m g``:

* A1, ``g = v`` regular: ``x^m v -> sum over edges e of x^(m+1) r(e)``;
* A2, ``g = v`` an infinite emitter: ``x^m v -> x^m q_Z + sum_{e in Z} x^(m+1) r(e)``;
* A3, ``g = q_Z``, ``Z < W``: ``x^m q_Z -> x^m q_W + sum_{e in W-Z} x^(m+1) r(e)``.

Every step keeps or raises degrees and never lowers the number of monomials.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Generic, Iterable, TypeVar

from .element import Element, Generator, Improper, Monomial, Proper, format_monomial
from .graph import Graph

W = TypeVar("W")


class RewriteError(ValueError):
    pass


@dataclass(frozen=True)
class SearchCaps:
    max_depth: int = 12
    max_monomials: int = 64
    max_new_count: int = 2
    max_states: int = 20000


DEFAULT_CAPS = SearchCaps()


class Status(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Verdict(Generic[W]):
    """A three-valued answer: a witness for yes, a certificate for no, caps for unknown."""

    status: Status
    witness: W | None = None
    reason: str = ""

    @classmethod
    def yes(cls, witness=None, reason: str = "") -> Verdict:
        return cls(Status.YES, witness, reason)

    @classmethod
    def no(cls, reason: str, witness=None) -> Verdict:
        return cls(Status.NO, witness, reason)

    @classmethod
    def unknown(cls, reason: str) -> Verdict:
        return cls(Status.UNKNOWN, None, reason)

    @property
    def is_yes(self) -> bool:
        return self.status is Status.YES

    @property
    def is_no(self) -> bool:
        return self.status is Status.NO

    @property
    def is_unknown(self) -> bool:
        return self.status is Status.UNKNOWN


@dataclass(frozen=True)
class RewriteStep:
    axiom: str
    degree: int
    generator: Generator
    params: tuple[tuple[str, int], ...] = ()

    @property
    def monomial(self) -> Monomial:
        return (self.degree, self.generator)

    def shifted(self, n: int) -> RewriteStep:
        return RewriteStep(self.axiom, self.degree + n, self.generator, self.params)

    def __str__(self) -> str:
        extra = ""
        if self.params:
            extra = " " + "{" + ",".join(f"{r}:{c}" for r, c in self.params) + "}"
        return f"{self.axiom} at {format_monomial(self.monomial)}{extra}"

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom,
            "degree": self.degree,
            "generator": str(self.generator),
            "params": dict(self.params),
        }


def rewrite_monomial(graph: Graph, step: RewriteStep) -> list[Monomial]:
    """The monomials replacing ``step.monomial`` after the step."""
    d, g = step.monomial
    v = g.vertex
    if step.axiom == "A1":
        if not isinstance(g, Proper) or not graph.is_regular(v):
            raise RewriteError(f"A1 needs a regular vertex, got {g}")
        return [(d + 1, Proper(grp.range)) for grp in graph.out_groups(v) for _ in range(int(grp.mult))]
    rm = graph.range_mult(v)
    target = dict(step.params)
    if any(c < 0 or c > rm.get(r, 0) for r, c in target.items()):
        raise RewriteError(f"{v} has too few edges for {step.params}")
    if step.axiom == "A2":
        if not isinstance(g, Proper) or not graph.is_infinite_emitter(v):
            raise RewriteError(f"A2 needs an infinite emitter, got {g}")
        old: dict[str, int] = {}
    elif step.axiom == "A3":
        if not isinstance(g, Improper):
            raise RewriteError(f"A3 needs an improper vertex, got {g}")
        old = g.as_dict()
        if any(target.get(r, 0) < c for r, c in old.items()) or target == old:
            raise RewriteError("A3 needs a strictly larger set")
    else:
        raise RewriteError(f"unknown axiom {step.axiom}")
    if not any(target.values()):
        raise RewriteError("Z must be nonempty")
    res: list[Monomial] = [(d, Improper.of(v, target))]
    for r in sorted(target):
        res += [(d + 1, Proper(r))] * (target[r] - old.get(r, 0))
    return res


def expand(graph: Graph, a: Element, step: RewriteStep) -> Element:
    """Apply one rewrite step to ``a``."""
    counts = a.counts()
    m = step.monomial
    if counts.get(m, 0) < 1:
        raise RewriteError(f"{format_monomial(m)} does not occur in {a}")
    counts[m] -= 1
    for r in rewrite_monomial(graph, step):
        counts[r] = counts.get(r, 0) + 1
    return Element(counts)


def replay(graph: Graph, a: Element, chain: Iterable[RewriteStep]) -> Element:
    for step in chain:
        a = expand(graph, a, step)
    return a


def shift_chain(chain: Iterable[RewriteStep], n: int) -> list[RewriteStep]:
    return [s.shifted(n) for s in chain]


def count_choices(graph: Graph, v: str, old: dict[str, int], limit: int) -> tuple[list[dict[str, int]], bool]:
    """Range-count maps ``W >= old`` (``W != old``) adding at most ``limit`` per range.

    Returns the maps and whether the limit cut off some choice.
    """
    rm = graph.range_mult(v)
    ranges = sorted(rm)
    options = []
    truncated = False
    for r in ranges:
        room = rm[r] - old.get(r, 0)
        top = min(room, limit)
        if room > limit:
            truncated = True
        options.append(range(int(top) + 1))
    res = []
    for extra in itertools.product(*options):
        if not any(extra):
            continue
        res.append({r: old.get(r, 0) + k for r, k in zip(ranges, extra) if old.get(r, 0) + k})
    return res, truncated


def steps_at(graph: Graph, m: Monomial, limit: int) -> tuple[list[RewriteStep], bool]:
    d, g = m
    v = g.vertex
    if isinstance(g, Proper):
        if graph.is_regular(v):
            return [RewriteStep("A1", d, g)], False
        if not graph.is_infinite_emitter(v):
            return [], False
        maps, trunc = count_choices(graph, v, {}, limit)
        return [RewriteStep("A2", d, g, tuple(sorted(w.items()))) for w in maps], trunc
    maps, trunc = count_choices(graph, v, g.as_dict(), limit)
    return [RewriteStep("A3", d, g, tuple(sorted(w.items()))) for w in maps], trunc


def successors(graph: Graph, a: Element, caps: SearchCaps,
               limit: int | None = None) -> tuple[list[tuple[RewriteStep, Element]], bool]:
    """All one-step successors within caps, and whether caps cut any off."""
    limit = caps.max_new_count if limit is None else limit
    res = []
    truncated = False
    for m, _ in a.terms:
        steps, trunc = steps_at(graph, m, limit)
        truncated |= trunc
        for step in steps:
            b = expand(graph, a, step)
            if len(b) > caps.max_monomials:
                truncated = True
                continue
            res.append((step, b))
    return res, truncated


def one_step_successors(graph: Graph, a: Element,
                        caps: SearchCaps = DEFAULT_CAPS) -> list[tuple[RewriteStep, Element]]:
    return successors(graph, a, caps)[0]


def is_terminal(graph: Graph, a: Element) -> bool:
    """Whether no axiom applies to any monomial of ``a``."""
    for (_, g), _ in a.terms:
        if isinstance(g, Improper) or not graph.is_sink(g.vertex):
            return False
    return True


@dataclass
class Exploration:
    root: Element
    parent: dict[Element, tuple[Element, RewriteStep] | None] = field(default_factory=dict)
    depth: dict[Element, int] = field(default_factory=dict)
    truncated: bool = False
    reasons: set[str] = field(default_factory=set)

    @property
    def states(self) -> list[Element]:
        return list(self.parent)

    @property
    def exhaustive(self) -> bool:
        return not self.truncated

    def chain_to(self, e: Element) -> list[RewriteStep]:
        chain = []
        while True:
            link = self.parent[e]
            if link is None:
                return chain[::-1]
            e, step = link
            chain.append(step)


def explore(graph: Graph, a: Element, caps: SearchCaps = DEFAULT_CAPS,
            keep: Callable[[Element], bool] | None = None,
            limit: Callable[[Element], int] | None = None,
            stop: Callable[[Element], bool] | None = None) -> Exploration:
    """Breadth-first exploration of the reducts of ``a`` within caps.

    ``keep`` prunes states (a pruned state never counts as truncation);
    ``limit`` gives the per-range cap on new counts at a state;
    ``stop`` ends the search as soon as it accepts a state.
    """
    ex = Exploration(a)
    ex.parent[a] = None
    ex.depth[a] = 0
    if stop is not None and stop(a):
        return ex
    frontier = [a]
    for depth in range(caps.max_depth):
        nxt = []
        for e in frontier:
            lim = caps.max_new_count if limit is None else limit(e)
            succ, trunc = successors(graph, e, caps, lim)
            if trunc:
                ex.truncated = True
                ex.reasons.add("new-count or monomial cap")
            for step, b in succ:
                if b in ex.parent or (keep is not None and not keep(b)):
                    continue
                if len(ex.parent) >= caps.max_states:
                    ex.truncated = True
                    ex.reasons.add("state cap")
                    return ex
                ex.parent[b] = (e, step)
                ex.depth[b] = depth + 1
                if stop is not None and stop(b):
                    return ex
                nxt.append(b)
        frontier = nxt
        if not frontier:
            return ex
    for e in frontier:
        lim = caps.max_new_count if limit is None else limit(e)
        if any(b not in ex.parent and (keep is None or keep(b))
               for _, b in successors(graph, e, caps, lim)[0]):
            ex.truncated = True
            ex.reasons.add("depth cap")
            break
    return ex


def reachable_elements(graph: Graph, a: Element, caps: SearchCaps = DEFAULT_CAPS) -> frozenset[Element]:
    """Reducts of ``a`` found within caps (``a`` included)."""
    return frozenset(explore(graph, a, caps).parent)


def chain_json(chain: Iterable[RewriteStep]) -> list[dict]:
    return [s.to_json() for s in chain]


__all__ = [
    "DEFAULT_CAPS", "Exploration", "RewriteError", "RewriteStep", "SearchCaps", "Status",
    "Verdict", "chain_json", "count_choices", "expand", "explore", "is_terminal",
    "one_step_successors", "reachable_elements", "replay", "rewrite_monomial", "shift_chain",
    "steps_at", "successors",
]
