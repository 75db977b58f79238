"""``talent`` command line.

Exit status: 0 for a definitive answer, 2 when caps left it open, 1 for bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .classify import NotStationary, classify_element, core_exit_split, is_stationary
from .connectivity import decide_arrow
from .element import Element, ElementError, format_element, parse_element
from .fixtures import ALIASES, SOURCES, fixture
from .graph import Graph, GraphError, format_graph, parse_graph
from .graph_classify import admissible_lattice, compare_invariants, table_row_predicates
from .oracle import oracle_equivalent, oracle_leq
from .rewrite import DEFAULT_CAPS, SearchCaps, Verdict


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- inputs --------------------------------------------------------------------

def load_graph(spec: str) -> Graph:
    """A graph file path or a fixture name."""
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
        try:
            return parse_graph(text)
        except GraphError as exc:
            raise InputError(f"{spec}: {exc}") from exc
    key = ALIASES.get(spec, spec).upper().replace("-", "_")
    if key in SOURCES:
        return fixture(key)
    raise InputError(f"{spec}: no such file or fixture")


def load_element(graph: Graph, text: str, what: str = "element") -> Element:
    try:
        return parse_element(graph, text)
    except ElementError as exc:
        raise InputError(f"{what} {text!r}: {exc}") from exc


_CAP_KEYS = {"depth": "max_depth", "monomials": "max_monomials",
             "newcount": "max_new_count", "states": "max_states"}


def parse_caps(text: str | None) -> tuple[SearchCaps, int | None]:
    """``depth=..,monomials=..,newcount=..,states=..,nmax=..``."""
    caps, n_max = DEFAULT_CAPS, None
    if not text:
        return caps, n_max
    for item in text.split(","):
        key, sep, val = item.partition("=")
        key = key.strip()
        try:
            num = int(val)
        except ValueError:
            num = 0
        if not sep or num <= 0:
            raise InputError(f"caps: {item!r} is not key=positive-integer")
        if key == "nmax":
            n_max = num
        elif key in _CAP_KEYS:
            caps = replace(caps, **{_CAP_KEYS[key]: num})
        else:
            raise InputError(f"caps: unknown key {key!r}")
    return caps, n_max


# -- DOT -----------------------------------------------------------------------

CORE_COLOR = "firebrick"
EXIT_COLOR = "steelblue"


def export_dot(graph: Graph, element: Element | None = None) -> str:
    """DOT text; infinite groups become one bold edge labelled ω.

    With an element, vertices of its core part are coloured red and those of
    its exit part blue.
    """
    colors: dict[str, str] = {}
    if element is not None and not element.is_zero:
        dec = core_exit_split(graph, element)
        for g in dec.exit_generators:
            colors[g.vertex] = EXIT_COLOR
        for g in dec.core_generators:
            colors[g.vertex] = CORE_COLOR
    lines = ["digraph E {"]
    for v in graph.vertices:
        attr = f' [style=filled, fillcolor={colors[v]}]' if v in colors else ""
        lines.append(f'  "{v}"{attr};')
    for grp in graph.groups:
        if grp.infinite:
            attr = ' [label="ω", style=bold]'
        elif grp.mult > 1:
            attr = f' [label="{int(grp.mult)}"]'
        else:
            attr = ""
        lines.append(f'  "{grp.source}" -> "{grp.range}"{attr};')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- commands --------------------------------------------------------------------

def _chain_lines(chain) -> list[str]:
    return [f"  {k + 1}. {step}" for k, step in enumerate(chain)]


def _verdict_code(v: Verdict) -> int:
    return 2 if v.is_unknown else 0


def cmd_classify_element(args, out: dict) -> tuple[int, list[str]]:
    g = load_graph(args.graph)
    a = load_element(g, args.elem)
    caps, n_max = parse_caps(args.caps)
    res = classify_element(g, a, caps, n_max)
    out.update(graph=format_graph(g), element=format_element(a), **res.to_json())
    if res.label == "Unknown":
        return 2, [f"UNKNOWN ({res.reason})"]
    if res.label == "Zero":
        return 0, ["ZERO"]
    if res.label == "Incomparable":
        return 0, [f"NOT STATIONARY, incomparable ({res.reason})"]
    if res.label == "Periodic":
        lines = [f"STATIONARY, comparable, periodic; period n={res.period}"]
        if args.trace:
            lines += _chain_lines(res.witness.to_settled)
        return 0, lines
    st = res.witness.stationarity
    lines = [f"STATIONARY, comparable, aperiodic; witness n={st.n}"]
    if args.trace:
        lines += _chain_lines(list(res.witness.chain) + list(st.chain))
    return 0, lines


def cmd_classify_graph(args, out: dict) -> tuple[int, list[str]]:
    g = load_graph(args.graph)
    vec = table_row_predicates(g)
    out.update(graph=format_graph(g), **vec.to_json())
    lines = [f"{k}: {v}" for k, v in vec.to_json().items() if k != "table"]
    lines += ["element classes:"] + [f"  {k}: {v}" for k, v in vec.table().items()]
    return 0, lines


def cmd_arrow(args, out: dict) -> tuple[int, list[str]]:
    g = load_graph(args.graph)
    a = load_element(g, args.src, "--from")
    b = load_element(g, args.dst, "--to")
    if a.is_zero:
        raise InputError("--from: the zero element rewrites only to itself")
    v = decide_arrow(g, a, b)
    out.update(graph=format_graph(g), source=format_element(a), target=format_element(b),
               verdict=v.status.value, reason=v.reason)
    if v.is_yes:
        out["path_system"] = v.witness.to_json(g)
        lines = [f"Yes: {a} -> {b}"]
        for (i, j), p in sorted(v.witness.paths.items()):
            lines.append(f"  monomial {i} -> target {j}: path of length {p.length} ({p.case})")
        if args.trace:
            lines += _chain_lines(v.witness.chain)
        return 0, lines
    return _verdict_code(v), [f"{v.status.value.capitalize()}: {v.reason}"]


def cmd_equiv(args, out: dict) -> tuple[int, list[str]]:
    g = load_graph(args.graph)
    caps, _ = parse_caps(args.caps)
    a = load_element(g, args.src, "--from")
    b = load_element(g, args.dst, "--to")
    v = oracle_equivalent(g, a, b, caps)
    out.update(graph=format_graph(g), left=format_element(a), right=format_element(b),
               verdict=v.status.value, reason=v.reason)
    if v.is_yes:
        out["witness"] = v.witness.to_json()
        lines = [f"Yes: common reduct {v.witness.common}"]
        if args.trace:
            lines += ["left:"] + _chain_lines(v.witness.chain_a)
            lines += ["right:"] + _chain_lines(v.witness.chain_b)
        return 0, lines
    return _verdict_code(v), [f"{v.status.value.capitalize()}: {v.reason}"]


def cmd_leq(args, out: dict) -> tuple[int, list[str]]:
    g = load_graph(args.graph)
    caps, _ = parse_caps(args.caps)
    a = load_element(g, args.src, "--from")
    b = load_element(g, args.dst, "--to")
    v = oracle_leq(g, a, b, caps, strict=args.strict)
    out.update(graph=format_graph(g), left=format_element(a), right=format_element(b),
               verdict=v.status.value, reason=v.reason)
    if v.is_yes:
        w = v.witness
        out["witness"] = w.to_json()
        lines = [f"Yes: {a} + {w.remainder} ~ {b} (via {w.reduct})"]
        if args.trace:
            lines += ["right:"] + _chain_lines(w.chain_b)
            lines += ["left:"] + _chain_lines(w.chain_a)
        return 0, lines
    return _verdict_code(v), [f"{v.status.value.capitalize()}: {v.reason}"]


def cmd_stationary(args, out: dict) -> tuple[int, list[str]]:
    g = load_graph(args.graph)
    a = load_element(g, args.elem)
    if a.is_zero:
        raise InputError("--elem: zero is not stationary by convention")
    _, n_max = parse_caps(args.caps)
    v = is_stationary(g, a, n_max)
    out.update(graph=format_graph(g), element=format_element(a),
               verdict=v.status.value, reason=v.reason)
    if v.is_yes:
        st = v.witness
        out["witness"] = st.to_json()
        lines = [f"Yes: {a} -> x^{st.n} ({a}) + {st.rest}"]
        if args.trace:
            lines += _chain_lines(st.chain)
        return 0, lines
    return _verdict_code(v), [f"{v.status.value.capitalize()}: {v.reason}"]


def cmd_ideals(args, out: dict) -> tuple[int, list[str]]:
    g = load_graph(args.graph)
    lat = admissible_lattice(g)
    out.update(graph=format_graph(g), size=lat.size, **lat.to_json())
    lines = [f"{lat.size} admissible pairs"]
    lines += [f"  {k}: {p.label()}" for k, p in enumerate(lat.pairs)]
    lines += ["covers: " + ", ".join(f"{i}<{j}" for i, j in lat.covers)]
    return 0, lines


def cmd_compare(args, out: dict) -> tuple[int, list[str]]:
    g1, g2 = load_graph(args.left), load_graph(args.right)
    rep = compare_invariants(g1, g2)
    out.update(left_graph=format_graph(g1), right_graph=format_graph(g2), **rep.to_json())
    lines = [rep.verdict]
    if rep.mismatches:
        width = max(len(m["invariant"]) for m in rep.mismatches)
        lines.append(f"{'invariant'.ljust(width)}  left   right  preserved property")
        for m in rep.mismatches:
            lines.append(f"{m['invariant'].ljust(width)}  {str(m['left']):<6} {str(m['right']):<6} "
                         f"{m['preserved']}")
    return 0, lines


def cmd_dot(args, out: dict) -> tuple[int, list[str]]:
    g = load_graph(args.graph)
    a = load_element(g, args.elem) if args.elem else None
    try:
        text = export_dot(g, a)
    except NotStationary as exc:
        raise InputError(f"--elem: {exc}") from exc
    out.update(graph=format_graph(g), dot=text)
    return 0, [text.rstrip("\n")]


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="talent", description="Compute in graph Γ-monoids.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON report")
    common.add_argument("--caps", help="depth=..,monomials=..,newcount=..,states=..,nmax=..")
    common.add_argument("--trace", action="store_true", help="print rewrite chains")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, graph=True, elem=False, pair=False, help=""):
        sp = sub.add_parser(name, parents=[common], help=help)
        if graph:
            sp.add_argument("--graph", "-g", required=True, help="graph file or fixture name")
        if elem:
            sp.add_argument("--elem", "-e", required=elem == "required")
        if pair:
            sp.add_argument("--from", dest="src", required=True)
            sp.add_argument("--to", dest="dst", required=True)
        sp.set_defaults(func=func)
        return sp

    add("classify-element", cmd_classify_element, elem="required",
        help="periodic / aperiodic / incomparable")
    add("classify-graph", cmd_classify_graph, help="graph conditions and element-class table")
    add("arrow", cmd_arrow, pair=True, help="decide a -> b")
    add("equiv", cmd_equiv, pair=True, help="decide a ~ b")
    add("leq", cmd_leq, pair=True, help="decide a <~ b").add_argument("--strict", action="store_true")
    add("stationary", cmd_stationary, elem="required", help="find a -> x^n a + b")
    add("ideals", cmd_ideals, help="admissible pairs and their order")
    cp = add("compare", cmd_compare, graph=False, help="compare the invariants of two graphs")
    cp.add_argument("left")
    cp.add_argument("right")
    add("dot", cmd_dot, elem=True, help="DOT export")
    return p


def run(argv: list[str] | None = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    args = build_parser().parse_args(argv)
    report: dict = {"command": args.command}
    try:
        code, lines = args.func(args, report)
    except InputError as exc:
        if args.json:
            print(json.dumps({"command": args.command, "error": str(exc)}), file=stdout)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 1
    report["exit"] = code
    if args.json:
        print(json.dumps(report, indent=2, default=str), file=stdout)
    else:
        print("\n".join(lines), file=stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
