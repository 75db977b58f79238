"""Acceptance suite: one PASS/FAIL line per criterion, each under ten seconds.

Run directly (``python tests/test_acceptance.py``) or through pytest.
Random corpora are seeded from TALENT_SEED (default 1).
"""

import functools
import itertools
import random
import sys
import time

import pytest

from talent.classify import (StationaryPartition, is_periodic, is_stationary, periodic_period,
                             search_stationary, validate_stationary_partition, verify_core_lemma)
from talent.concrete import common_reduct, improper_element, same_count_pairs
from talent.connectivity import GenPath, PathSystem, decide_arrow, decide_contains
from talent.element import Element, Proper, parse_element, shift
from talent.fixtures import fixture
from talent.graph_classify import (compare_invariants, condition_K, condition_K_via_quotients,
                                   table_row_predicates)
from talent.oracle import brute_force_arrow, brute_force_leq, oracle_equivalent, oracle_leads_to
from talent.rewrite import SearchCaps, explore, replay
from talent.sampling import equivalent_pair, random_element, random_graph, random_reduct, seed

BUDGET = 10.0
ROW_FINITE = ["LOOP1", "ROSE2", "TOEPLITZ", "CLOCK", "E1", "E2", "BIFUR", "TWO_INTO_ONE",
              "TWO_LOOP_CHAIN", "ROSE2_OUTSPLIT", "EDGELESS"]


def criterion(number, title):
    """Time the check, print its PASS/FAIL line, fail the test on a failure or overrun."""
    def wrap(check):
        def test(capsys):
            t0 = time.perf_counter()
            failures, detail = [], ""
            try:
                detail = check(failures)
            except Exception as exc:  # reported as a failure line, then re-raised
                failures.append(f"{type(exc).__name__}: {exc}")
                raise
            finally:
                dt = time.perf_counter() - t0
                if dt > BUDGET:
                    failures.append(f"took {dt:.1f}s")
                status = "FAIL" if failures else "PASS"
                extra = "; ".join(failures[:5]) if failures else detail
                with capsys.disabled():
                    print(f"\n{status} criterion {number}: {title} ({dt:.2f}s) {extra}")
            assert not failures, failures
        test.__name__ = check.__name__
        test.__doc__ = check.__doc__
        return test
    return wrap


def P(g, text):
    return parse_element(g, text)


@functools.lru_cache(maxsize=None)
def corpus(size=500):
    rng = random.Random(seed(1))
    out = []
    for _ in range(size):
        g = random_graph(rng, 5)
        out.append((g, random_element(rng, g, max_monomials=4, max_degree=3)))
    return tuple(out)


@criterion(1, "worked examples")
def test_criterion_1_worked_examples(failures):
    def expect(ok, what):
        if not ok:
            failures.append(what)

    e1, e2 = fixture("E1"), fixture("E2")
    expect(decide_arrow(e1, P(e1, "v1"), P(e1, "x w1")).is_yes, "v1 -> x w1")
    v = oracle_leads_to(e2, P(e2, "v2"), P(e2, "x^2 w2"))
    expect(v.is_yes and len(v.witness) == 2, "v2 -> x^2 w2 by two steps")
    expect(decide_arrow(e2, P(e2, "v2"), P(e2, "x^2 w2")).is_yes, "v2 -> x^2 w2")

    two = fixture("TWO_INTO_ONE")
    v = decide_arrow(two, P(two, "u + w"), P(two, "2 x v"))
    expect(v.is_yes and sorted(v.witness.partition) == [(0,), (1,)], "u + w -> xv + xv")
    expect(decide_contains(two, P(two, "u"), P(two, "x^2 v")).is_no, "u -> x^2 v + c for some c")
    monos = [(d, Proper(x)) for d in range(5) for x in two.vertices]
    cs = [Element()] + [Element(list(c)) for k in (1, 2) for c in itertools.combinations_with_replacement(monos, k)]
    bad = [c for c in cs if decide_arrow(two, P(two, "u"), P(two, "x^2 v") + c).is_yes]
    expect(not bad, f"u -> x^2 v + c for c in {bad[:3]}")
    reducts = explore(two, P(two, "u"))
    expect(reducts.exhaustive and not any(e.contains(P(two, "x^2 v")) for e in reducts.states),
           "reducts of u avoid x^2 v")

    bif = fixture("BIFUR")
    v = decide_arrow(bif, P(bif, "v"), P(bif, "x u + x w"))
    expect(v.is_yes and v.witness.partition == ((0, 1),), "v -> xu + xw with one block")
    for k in range(-3, 7):
        expect(decide_arrow(bif, P(bif, "v"), shift(P(bif, "w"), k)).is_no, f"v -> x^{k} w refuted")

    toe = fixture("TOEPLITZ")
    a = P(toe, "v + w")
    st = is_stationary(toe, a)
    expect(st.is_yes and st.witness.n == 1 and replay(toe, a, st.witness.chain) == shift(a, 1) + st.witness.rest,
           "v + w stationary with n = 1")
    b = P(toe, "v + x w")
    expect(not is_stationary(toe, b).is_yes, "v + x w has no stationary partition")
    expect(all(decide_contains(toe, b, shift(b, n)).is_no for n in range(1, 13)),
           "v + x w -> x^n (v + x w) + c refuted for n <= 12")
    expect(not search_stationary(toe, b, SearchCaps(max_depth=12), n_max=12).is_yes,
           "no stationary reduct of v + x w at depth 12")

    chain = fixture("TWO_LOOP_CHAIN")
    a = P(chain, "v1 + v2")
    v1, v2 = Proper("v1"), Proper("v2")
    shared = PathSystem(a, shift(a, 1), ((0, 1), ()),
                        {(0, 0): GenPath(v1, v1, ((0, 0),)), (0, 1): GenPath(v1, v2, ((1, 0),))})
    apart = PathSystem(a, shift(a, 1), ((0,), (1,)),
                       {(0, 0): GenPath(v1, v1, ((0, 0),)), (1, 1): GenPath(v2, v2, ((2, 0),))})
    for name, ps in (("I1={1,2}, I2={}", shared), ("I1={1}, I2={2}", apart)):
        ok, why = validate_stationary_partition(chain, StationaryPartition(a, 1, ps))
        expect(ok, f"partition {name}: {why}")
    return "all worked examples reproduced"


PINNED = {
    #            cyc acy nox exc  L  K  NE  aC  aP  aA  gs  s  pis size
    "LOOP1":    (1, 0, 1, 0, 0, 0, 1, 1, 1, 0, 1, 0, 0, 2),
    "ROSE2":    (1, 0, 0, 1, 1, 1, 0, 1, 0, 1, 1, 1, 1, 2),
    "TOEPLITZ": (1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 3),
    "CLOCK":    (1, 0, 1, 0, 0, 0, 1, 1, 1, 0, 1, 0, 0, 2),
    "E1":       (0, 1, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1, 0, 2),
    "E2":       (0, 1, 0, 0, 1, 1, 1, 0, 0, 0, 1, 1, 0, 2),
    "BIFUR":    (0, 1, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0, 4),
    "INFB":     (1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 3),
    "IECYC":    (1, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 4),
}
VECTOR_FIELDS = ("has_cycle", "acyclic", "has_noexit_cycle", "has_exit_cycle", "condition_L",
                 "condition_K", "condition_NE", "all_comparable", "all_periodic", "all_aperiodic",
                 "graded_simple", "simple", "purely_infinite_simple", "lattice_size")


def vector_tuple(vec):
    return tuple(int(getattr(vec, f)) for f in VECTOR_FIELDS)


def implications(vec):
    broken = []
    if vec.all_periodic and not vec.condition_NE:
        broken.append("all_periodic => NE")
    if vec.all_aperiodic and not (vec.condition_L and vec.all_comparable):
        broken.append("all_aperiodic => L and all_comparable")
    if vec.acyclic == vec.has_cycle:
        broken.append("acyclic = not has_cycle")
    if vec.all_periodic and not vec.all_comparable:
        broken.append("all_periodic => all_comparable")
    if vec.has_cycle and not (vec.has_exit_cycle or vec.has_noexit_cycle):
        broken.append("a cycle has an exit or not")
    if vec.simple and not vec.graded_simple or vec.purely_infinite_simple and not vec.simple:
        broken.append("simplicity chain")
    return broken


@criterion(2, "classification table")
def test_criterion_2_invariant_table(failures):
    for name, want in PINNED.items():
        got = vector_tuple(table_row_predicates(fixture(name)))
        if got != want:
            diff = [f for f, x, y in zip(VECTOR_FIELDS, got, want) if x != y]
            failures.append(f"{name}: {diff}")
    rng = random.Random(seed(1))
    for _ in range(200):
        g = random_graph(rng, 6)
        for b in implications(table_row_predicates(g)):
            failures.append(f"{b} fails on {g.groups}")
    return "9 pinned vectors, implications on 200 random graphs"


@criterion(3, "oracle-decider agreement")
def test_criterion_3_oracle_agreement(failures):
    rng = random.Random(seed(1) + 3)
    bf_caps = SearchCaps(max_states=2000)
    periodic = compared = unsettled = 0
    for g, a in corpus():
        if is_periodic(g, a):
            periodic += 1
            w = periodic_period(g, a)
            if not oracle_equivalent(g, a, shift(a, w.n)).is_yes:
                failures.append(f"periodic {a} not ~ x^{w.n} of itself")
        for b in (random_reduct(rng, g, a, 3), random_element(rng, g)):
            bf = brute_force_arrow(g, a, b, bf_caps)
            if bf.is_unknown:
                unsettled += 1
                continue
            compared += 1
            exact = decide_arrow(g, a, b)
            if exact.status != bf.status:
                failures.append(f"{a} -> {b}: decider {exact.status.value}, oracle {bf.status.value}")
            elif exact.is_yes and replay(g, a, exact.witness.chain) != b:
                failures.append(f"{a} -> {b}: chain does not replay")
    return f"{periodic} periodic shifts equivalent; {compared} arrows agree, {unsettled} left to caps"


@criterion(4, "no descent")
def test_criterion_4_no_descent(failures):
    caps = SearchCaps(max_depth=6, max_monomials=16, max_new_count=2, max_states=150)
    refuted = capped = 0
    for g, a in corpus()[:150]:
        for n in range(1, 5):
            v = brute_force_leq(g, a, shift(a, n), caps, strict=True)
            if v.is_yes:
                failures.append(f"{a} below x^{n} ({a}) with remainder {v.witness.remainder}")
            elif v.is_no:
                refuted += 1
            else:
                capped += 1
    return f"600 searches, no witness ({refuted} exhaustive, {capped} capped)"


@criterion(5, "cancellativity")
def test_criterion_5_cancellativity(failures):
    rng = random.Random(seed(1) + 5)
    caps = SearchCaps(max_depth=8, max_monomials=16, max_new_count=2, max_states=400)
    yes = tries = 0
    while yes < 200 and tries < 2000:
        tries += 1
        g = random_graph(rng, 4)
        a, b = equivalent_pair(rng, g, random_element(rng, g, 3, 2))
        c = random_element(rng, g, 2, 2)
        if not oracle_equivalent(g, a + c, b + c, caps, strip=False).is_yes:
            continue
        yes += 1
        if not oracle_equivalent(g, a, b, caps, strip=False).is_yes:
            failures.append(f"{a} + {c} ~ {b} + {c} but {a} ~ {b} not found")
    if yes < 200:
        failures.append(f"only {yes} equivalent triples in {tries} tries")
    return f"{yes} triples from {tries} draws"


@criterion(6, "canonicalization soundness")
def test_criterion_6_property_q(failures):
    pairs = 0
    for name in ("INFB", "IECYC"):
        g = fixture(name)
        for v in g.infinite_emitters:
            for z1, z2 in same_count_pairs(g, v, max_count=3):
                pairs += 1
                if common_reduct(g, improper_element(v, z1), improper_element(v, z2), depth=4) is None:
                    failures.append(f"{name}: {sorted(z1)} vs {sorted(z2)}")
    return f"{pairs} pairs share a reduct"


@criterion(7, "core lemma replay")
def test_criterion_7_core_lemma(failures):
    count = 0
    for g, a in corpus():
        st = is_stationary(g, a)
        if not st.is_yes:
            continue
        count += 1
        v = verify_core_lemma(g, st.witness)
        if not v.is_yes:
            failures.append(f"{a}: {v.reason}")
    return f"{count} stationary witnesses"


@criterion(8, "comparator")
def test_criterion_8_comparator(failures):
    rep = compare_invariants(fixture("ROSE2"), fixture("ROSE2_OUTSPLIT"))
    if rep.verdict != "inconclusive":
        failures.append(f"ROSE2 vs out-split: {rep.mismatches}")
    for left, right, cited in (("LOOP1", "EDGELESS", "has_cycle"), ("TOEPLITZ", "LOOP1", "condition_L")):
        rep = compare_invariants(fixture(left), fixture(right))
        names = [m["invariant"] for m in rep.mismatches]
        if rep.verdict != "necessarily non-isomorphic" or cited not in names:
            failures.append(f"{left} vs {right}: {rep.verdict} {names}")
    return "rose vs out-split inconclusive; two non-isomorphic pairs"


@criterion(9, "condition K cross-check")
def test_criterion_9_condition_k(failures):
    for name in ROW_FINITE:
        g = fixture(name)
        if condition_K(g) != condition_K_via_quotients(g):
            failures.append(name)
    rng = random.Random(seed(1) + 9)
    for _ in range(100):
        g = random_graph(rng, 5, omega=0)
        if condition_K(g) != condition_K_via_quotients(g):
            failures.append(str(g.groups))
    return f"{len(ROW_FINITE)} fixtures, 100 random row-finite graphs"


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
