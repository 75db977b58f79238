"""Generators, monomials and elements of the free Γ-monoid of a graph.

An element is a finite multiset of monomials ``x^n g``, where ``g`` is a
proper vertex or an improper vertex ``q^v_Z``.  Improper vertices are kept
in range-count form: ``Z`` is recorded as the number of its edges landing at
each range vertex, so two edge sets with the same counts are the same
generator.

>>> from talent.fixtures import fixture
>>> g = fixture("TOEPLITZ")
>>> a = parse_element(g, "x v + 2 w + x^-1 v")
>>> format_element(a)
'x^-1 v + 2 w + x v'
>>> format_element(shift(a, 1))
'v + 2 x w + x^2 v'
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .graph import VERTEX_RE, Edge, Graph


class ElementError(ValueError):
    def __init__(self, message: str, column: int | None = None):
        self.column = column
        prefix = f"column {column}: " if column is not None else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Proper:
    vertex: str

    def __str__(self) -> str:
        return self.vertex


@dataclass(frozen=True)
class Improper:
    vertex: str
    counts: tuple[tuple[str, int], ...]

    @classmethod
    def of(cls, vertex: str, counts: Mapping[str, int]) -> Improper:
        return cls(vertex, tuple(sorted((r, c) for r, c in counts.items() if c)))

    def count(self, r: str) -> int:
        for rr, c in self.counts:
            if rr == r:
                return c
        return 0

    def as_dict(self) -> dict[str, int]:
        return dict(self.counts)

    @property
    def total(self) -> int:
        return sum(c for _, c in self.counts)

    def le(self, other: Improper) -> bool:
        """Range-count containment ``Z <= W`` (same emitter)."""
        return self.vertex == other.vertex and all(c <= other.count(r) for r, c in self.counts)

    def __str__(self) -> str:
        inner = ",".join(f"{r}:{c}" for r, c in self.counts)
        return f"q({self.vertex}){{{inner}}}"


Generator = Union[Proper, Improper]
Monomial = tuple[int, Generator]


def gen_key(g: Generator) -> tuple:
    if isinstance(g, Proper):
        return (g.vertex, 0, ())
    return (g.vertex, 1, g.counts)


def mono_key(m: Monomial) -> tuple:
    return (m[0], gen_key(m[1]))


class Element:
    """Immutable multiset of monomials, with terms kept in canonical order."""

    __slots__ = ("terms", "_hash")

    def __init__(self, counts: Mapping[Monomial, int] | Iterable[Monomial] = ()):
        if isinstance(counts, Mapping):
            items = [(m, c) for m, c in counts.items() if c]
        else:
            items = list(Counter(counts).items())
        for m, c in items:
            if c < 0:
                raise ElementError(f"negative coefficient for {m}")
        items.sort(key=lambda mc: mono_key(mc[0]))
        self.terms: tuple[tuple[Monomial, int], ...] = tuple(items)
        self._hash = hash(self.terms)

    @classmethod
    def mono(cls, gen: Generator, degree: int = 0, coeff: int = 1) -> Element:
        return cls({(degree, gen): coeff})

    @classmethod
    def vertex(cls, v: str, degree: int = 0) -> Element:
        return cls.mono(Proper(v), degree)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Element) and self.terms == other.terms

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: Element) -> bool:
        return self.sort_key() < other.sort_key()

    def sort_key(self) -> tuple:
        return (len(self), tuple((mono_key(m), c) for m, c in self.terms))

    def __repr__(self) -> str:
        return f"Element({format_element(self)!r})"

    def __str__(self) -> str:
        return format_element(self)

    def __len__(self) -> int:
        return sum(c for _, c in self.terms)

    def __add__(self, other: Element) -> Element:
        return add(self, other)

    def __sub__(self, other: Element) -> Element:
        mine = self.counts()
        for m, c in other.terms:
            if mine.get(m, 0) < c:
                raise ElementError(f"{format_element(other)} is not contained in {format_element(self)}")
            mine[m] -= c
        return Element(mine)

    def counts(self) -> dict[Monomial, int]:
        return dict(self.terms)

    def count(self, m: Monomial) -> int:
        for mm, c in self.terms:
            if mm == m:
                return c
        return 0

    def contains(self, other: Element) -> bool:
        mine = dict(self.terms)
        return all(mine.get(m, 0) >= c for m, c in other.terms)

    def monomials(self) -> list[Monomial]:
        """Normal representation: monomials with repetition, in canonical order."""
        return [m for m, c in self.terms for _ in range(c)]

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> tuple[int, int]:
        if not self.terms:
            raise ElementError("zero element has no degrees")
        return self.terms[0][0][0], max(m[0] for m, _ in self.terms)


ZERO = Element()


def add(a: Element, b: Element) -> Element:
    c = Counter(dict(a.terms))
    c.update(dict(b.terms))
    return Element(c)


def total(elements: Iterable[Element]) -> Element:
    c: Counter = Counter()
    for e in elements:
        c.update(dict(e.terms))
    return Element(c)


def shift(a: Element, n: int) -> Element:
    return Element({(d + n, g): c for (d, g), c in a.terms})


def support(a: Element) -> frozenset[Generator]:
    return frozenset(g for (_, g), _ in a.terms)


def base(g: Generator) -> str:
    return g.vertex


def canonical_improper(graph: Graph, v: str, edges: Iterable[Edge]) -> Improper:
    """Range-count form of ``q^v_Z`` for a finite nonempty set ``Z`` of edges out of ``v``."""
    zs = set(edges)
    if not zs:
        raise ElementError("Z must be nonempty")
    if not graph.is_infinite_emitter(v):
        raise ElementError(f"{v} is not an infinite emitter")
    counts: Counter = Counter()
    for e in zs:
        if not graph.is_edge(e) or graph.edge_source(e) != v:
            raise ElementError(f"{e} is not an edge out of {v}")
        counts[graph.edge_range(e)] += 1
    return Improper.of(v, counts)


def check_generator(graph: Graph, g: Generator) -> None:
    if g.vertex not in graph.vertices:
        raise ElementError(f"unknown vertex {g.vertex}")
    if isinstance(g, Improper):
        if not graph.is_infinite_emitter(g.vertex):
            raise ElementError(f"{g.vertex} is not an infinite emitter")
        if not g.counts:
            raise ElementError("Z must be nonempty")
        rm = graph.range_mult(g.vertex)
        for r, c in g.counts:
            if c < 1 or c > rm.get(r, 0):
                raise ElementError(f"{g.vertex} has fewer than {c} edges to {r}")


def check_element(graph: Graph, a: Element) -> None:
    for (_, g), _ in a.terms:
        check_generator(graph, g)


# -- text ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<sym>\S))")


def _tokens(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m:
            break
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    toks.append(("end", "", len(text) + 1))
    return toks


class _Parser:
    def __init__(self, graph: Graph, text: str):
        self.graph = graph
        self.toks = _tokens(text)
        self.i = 0

    def peek(self, k: int = 0) -> tuple[str, str, int]:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self, kind: str, value: str | None = None) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            raise ElementError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def element(self) -> Element:
        if self.peek()[:2] == ("int", "0") and self.peek(1)[0] == "end":
            self.i += 1
            return Element()
        counts: Counter = Counter()
        while True:
            coeff, mono = self.term()
            counts[mono] += coeff
            if self.peek()[:2] == ("sym", "+"):
                self.i += 1
                continue
            self.take("end")
            return Element(counts)

    def term(self) -> tuple[int, Monomial]:
        coeff = 1
        if self.peek()[0] == "int":
            tok = self.take("int")
            coeff = int(tok[1])
            if coeff == 0:
                raise ElementError("coefficient must be positive", tok[2])
        degree = 0
        if self.peek()[:2] == ("id", "x"):
            self.i += 1
            degree = 1
            if self.peek()[:2] == ("sym", "^"):
                self.i += 1
                sign = 1
                if self.peek()[:2] == ("sym", "-"):
                    self.i += 1
                    sign = -1
                degree = sign * int(self.take("int")[1])
        return coeff, (degree, self.generator())

    def generator(self) -> Generator:
        tok = self.take("id")
        if tok[1] == "q" and self.peek()[:2] == ("sym", "("):
            self.i += 1
            v = self.take("id")
            self.take("sym", ")")
            self.take("sym", "{")
            counts: dict[str, int] = {}
            while True:
                r = self.take("id")
                self.take("sym", ":")
                c = self.take("int")
                if r[1] in counts:
                    raise ElementError(f"repeated range {r[1]}", r[2])
                counts[r[1]] = int(c[1])
                if self.peek()[:2] == ("sym", ","):
                    self.i += 1
                if self.peek()[:2] == ("sym", "}"):
                    self.i += 1
                    break
            gen: Generator = Improper.of(v[1], counts)
            if any(c == 0 for c in counts.values()):
                raise ElementError("range counts must be positive", v[2])
        else:
            if not VERTEX_RE.match(tok[1]):
                raise ElementError(f"bad vertex id {tok[1]!r}", tok[2])
            gen = Proper(tok[1])
        try:
            check_generator(self.graph, gen)
        except ElementError as exc:
            raise ElementError(str(exc), tok[2]) from None
        return gen


def parse_element(graph: Graph, text: str) -> Element:
    """Parse ``[coeff] [x | x^n] gen`` terms joined by ``+``; ``0`` is the zero element."""
    return _Parser(graph, text).element()


def format_monomial(m: Monomial) -> str:
    d, g = m
    if d == 0:
        return str(g)
    if d == 1:
        return f"x {g}"
    return f"x^{d} {g}"


def format_element(a: Element) -> str:
    if a.is_zero:
        return "0"
    parts = []
    for m, c in a.terms:
        s = format_monomial(m)
        parts.append(s if c == 1 else f"{c} {s}")
    return " + ".join(parts)
