"""Acceptance checks; the terminal summary prints one pass/fail line per criterion."""

import math
import random
import time
from fractions import Fraction

import pytest

from helpers import (
    check_border_values,
    check_fixes_are_local_fixes,
    check_local_fixes_exist,
    check_no_new_violations,
    check_sum_approximation,
    load,
    query,
    random_1ad_instance,
    random_local_instance,
    random_sum_case,
    tied_1ad_instance,
)
from lsfix.cli import run
from lsfix.cqa import cqa, cqa_range, enumerate_fixes_1ad, fixes_for, reduce_1ad
from lsfix.errors import UnsupportedConstraint
from lsfix.exact import dfop, dfp, ls_fixes, ne
from lsfix.gf2 import build_rwae2, guarantee, guarantee_factor
from lsfix.model import Fact, Instance, distance
from lsfix.parser import parse_constraints, parse_query, parse_schema
from lsfix.query import eval_aggregate
from lsfix.repair import conflict_hypergraph, satisfies, satisfies_all
from lsfix.setcover import (
    apply_cover,
    build_mwscp,
    exact_cover,
    greedy_cover,
    optimal_covers,
    primal_dual_cover,
    star_normalize,
)

CORPUS_SIZE = 300
T1 = Fact("Client", (1, 15, 52))
T2 = Fact("Client", (2, 16, 51))
T4 = Fact("Buy", (1, "CD", 27))
T5 = Fact("Buy", (1, "DVD", 26))


def criterion(number, title):
    return pytest.mark.criterion(number, title)


def client_fixes(D):
    d1 = D.replace({T1: Fact("Client", (1, 15, 50)), T2: Fact("Client", (2, 16, 50)),
                    T4: Fact("Buy", (1, "CD", 25)), T5: Fact("Buy", (1, "DVD", 25))})
    d2 = D.replace({T1: Fact("Client", (1, 18, 52)), T2: Fact("Client", (2, 16, 50))})
    return d1, d2


# -- sample instances ------------------------------------------------------------------


@criterion(1, "weighted traffic instance: one fix at distance 1/10 in under 1 s")
def test_traffic_fix():
    schema, D, ics = load("traffic")
    start = time.perf_counter()
    r = ls_fixes(D, ics)
    elapsed = time.perf_counter() - start
    expected = Instance(schema, [Fact("Traffic", ("1.1", "a", 0, 1000)), Fact("Traffic", ("1.1", "b", 1, 900)),
                                 Fact("Traffic", ("1.3", "b", 1, 850))])
    assert r.fixes == [expected]
    assert r.min_distance == Fraction(1, 10) and distance(D, expected) == Fraction(1, 10)
    assert elapsed < 1


@criterion(2, "client instance: two fixes at distance 10, four violation sets, under 1 s")
def test_client_fixes():
    _, D, ics = load("clients")
    start = time.perf_counter()
    r = ls_fixes(D, ics)
    hg = conflict_hypergraph(D, ics)
    elapsed = time.perf_counter() - start
    assert set(r.fixes) == set(client_fixes(D)) and len(r.fixes) == 2
    assert r.min_distance == 10 and all(distance(D, f) == 10 for f in r.fixes)
    assert {e.tuples for e in hg.edges} == {frozenset({T1, T4}), frozenset({T1, T5}), frozenset({T1}), frozenset({T2})}
    assert elapsed < 1


@criterion(3, "client cover instance: five sets, two optimal covers, greedy trace, under 1 s")
def test_client_cover():
    _, D, ics = load("clients")
    start = time.perf_counter()
    ci = build_mwscp(D, ics)
    covers = optimal_covers(ci)
    exact = exact_cover(ci)
    greedy = greedy_cover(ci)
    fixed = apply_cover(D, greedy, ci)
    elapsed = time.perf_counter() - start
    edge = {frozenset({T1, T4}): "A", frozenset({T1}): "B", frozenset({T1, T5}): "C", frozenset({T2}): "D"}
    table = [(s.name, s.owner, sorted(edge[ci.hyperedges[e].tuples] for e in s.members)) for s in ci.sets]
    assert table == [("S1", T1, ["B"]), ("S2", T1, ["A", "B", "C"]), ("S3", T2, ["D"]),
                     ("S4", T4, ["A"]), ("S5", T5, ["C"])]
    assert [ci.weights[s.id] for s in ci.sets] == [4, 9, 1, 4, 1]
    assert exact.weight == 10
    assert [sorted(c.chosen) for c in covers] == [[1, 3, 4, 5], [2, 3]]
    assert [t["chosen"] for t in greedy.trace] == ["S3", "S5", "S1", "S4"] and greedy.weight == 10
    assert fixed == client_fixes(D)[0]
    assert elapsed < 1


@criterion(4, "three-tuple instance under two-sided bounds has no fix")
def test_no_fix():
    _, D, ics = load("no_fix")
    assert ne(D, ics) is False
    assert ls_fixes(D, ics).fixes == []
    assert dfop(D, ics) is None


@criterion(5, "grouped sum counts every witness")
def test_grouped_sum():
    schema, D, _ = load("sums")
    assert eval_aggregate(query("sums", "query.txt", schema), D) == {(1, 2, 11), (2, 3, 2)}


# -- random local corpus --------------------------------------------------------------------


@pytest.fixture(scope="module")
def corpus():
    out = []
    start = time.perf_counter()
    for seed in range(CORPUS_SIZE):
        schema, D, ics = random_local_instance(random.Random(seed), max_tuples=6, max_ics=3, lo=-8, hi=8)
        ci = build_mwscp(D, ics)
        greedy = star_normalize(greedy_cover(ci), ci, D, ics)
        out.append({
            "D": D, "ics": ics, "ci": ci,
            "greedy_fix": apply_cover(D, greedy, ci),
            "primal_dual": primal_dual_cover(ci),
            "covers": optimal_covers(ci, max_sets=30),
            "exact": ls_fixes(D, ics),
        })
    return out, time.perf_counter() - start


@criterion(6, "greedy repair is consistent and within (1 + ln N) of optimal, corpus under 60 s")
def test_greedy_bound(corpus):
    cases, elapsed = corpus
    assert len(cases) >= 200
    for c in cases:
        opt = c["exact"].min_distance
        n = max(len(c["ci"].hyperedges), 1)
        assert satisfies_all(c["greedy_fix"], c["ics"])
        assert distance(c["D"], c["greedy_fix"]) <= (1 + math.log(n)) * opt
    assert elapsed < 60


@criterion(7, "primal-dual cover within the element frequency of optimal")
def test_primal_dual_bound(corpus):
    cases, _ = corpus
    for c in cases:
        assert c["primal_dual"].weight <= c["ci"].frequency() * c["exact"].min_distance


@criterion(8, "optimal covers and least-squares fixes coincide")
def test_covers_are_fixes(corpus):
    cases, _ = corpus
    for c in cases:
        D, ics, ci = c["D"], c["ics"], c["ci"]
        fixed = {}
        for cover in c["covers"]:
            f = apply_cover(D, star_normalize(cover, ci, D, ics), ci)
            assert distance(D, f) == cover.weight
            fixed[f] = cover.weight
        assert set(fixed) == set(c["exact"].fixes)
        assert set(fixed.values()) == {c["exact"].min_distance}


@criterion(9, "local fixes exist, add no violations, make up every fix, and sit on the grid")
def test_local_fix_safety(corpus):
    cases, _ = corpus
    for c in cases:
        D, ics, fixes = c["D"], c["ics"], c["exact"].fixes
        check_local_fixes_exist(D, ics)
        check_no_new_violations(D, ics)
        check_fixes_are_local_fixes(D, ics, fixes)
        check_border_values(D, ics, fixes)


# -- single-atom constraints and query answering ---------------------------------------


@criterion(10, "single-atom fix enumeration agrees with the exact solver")
def test_single_atom_correspondence():
    for seed in range(200):
        rng = random.Random(seed)
        _, D, ics = tied_1ad_instance(rng) if seed % 2 else random_1ad_instance(rng)
        assert set(enumerate_fixes_1ad(D, ics)) == set(ls_fixes(D, ics).fixes)


QUERIES = [
    "q(k) <- P(k, r, a, b), a > {c}.",
    "q(k, r) <- P(k, r, a, b), b <= {c}.",
    "q(k) <- Q(k, r, c), c != {c}.",
    "q(r) <- P(k, r, a, b), Q(j, r, c).",
    "q() <- P(k, r, a, b), a = {c}.",
    "q(a, c) <- P(k, r, a, b), Q(j, s, c), r = s.",
]


def probes(schema, D):
    """A query no fix can satisfy and one every fix satisfies."""
    never = parse_query("q() <- P(-12345, r, a, b).", schema)
    if not len(D):
        return never, None
    f = next(iter(D))
    rest = ", ".join(f"v{i}" for i in range(1, len(f.values)))
    return never, parse_query(f"q() <- {f.relation}({f.values[0]}, {rest}).", schema)


@criterion(11, "skeptical within majority within brave; no-fix cross-checks; ground answers")
def test_cqa_semantics():
    for seed in range(150):
        rng = random.Random(seed)
        gen = (random_local_instance, random_1ad_instance, tied_1ad_instance)[seed % 3]
        schema, D, ics = gen(rng) if gen is tied_1ad_instance else gen(rng, max_tuples=4)
        if seed % 4 == 0:
            # an empty band for P.a, so any P tuple leaves no fix
            c = rng.randint(0, 4)
            ics = ics + parse_constraints(f"lo: DENY P(k, r, a, b), a < {c}.\nhi: DENY P(k, r, a, b), a > {c - 1}.", schema)
        fixes = fixes_for(D, ics)
        for template in QUERIES:
            q = parse_query(template.format(c=rng.randint(-3, 6)), schema)
            s, m, b = (cqa(q, D, ics, sem, fixes=fixes).answers for sem in ("skeptical", "majority", "brave"))
            if fixes or not isinstance(s, bool):
                assert s <= m <= b
        never, always = probes(schema, D)
        exists = ne(D, ics)
        assert cqa(never, D, ics, "skeptical", fixes=fixes).answers is (not exists)
        if always is not None:
            assert (cqa(always, D, ics, "majority", fixes=fixes).answers is False) is (not exists)
    schema, D, ics = load("no_fix")
    assert cqa(parse_query("q() <- R(99, y).", schema), D, ics, "skeptical").answers is True
    assert cqa(parse_query("q() <- R(1, y).", schema), D, ics, "majority").answers is False
    schema, D, ics = load("clients")
    fixes = fixes_for(D, ics)
    assert cqa(query("clients", "ground.txt", schema), D, ics, "skeptical", fixes=fixes).answers is True
    t1 = parse_query("q() <- Client(1, 15, 50).", schema)
    assert cqa(t1, D, ics, "brave", fixes=fixes).answers is True
    assert cqa(t1, D, ics, "skeptical", fixes=fixes).answers is False


@criterion(12, "range of the client money total is (1000, 1002)")
def test_range():
    schema, D, ics = load("clients")
    assert cqa_range(query("clients", "sum_m.txt", schema), D, ics) == (Fraction(1000), Fraction(1002))


@criterion(13, "derandomized sum within k^-m of the optimum, which equals the range maximum")
def test_sum_approximation():
    for seed in range(120):
        check_sum_approximation(*random_sum_case(seed))
    assert guarantee_factor(2, 4) == Fraction(1, 16)
    schema = parse_schema("".join(f"relation {r}(k: int key, v: int fix)\n" for r in "ABCE"))
    D = Instance(schema, [Fact(r, (1, 4)) for r in "ABCE"])
    ics = parse_constraints("".join(f"{r.lower()}: DENY {r}(k, v), v = 4.\n" for r in "ABCE"), schema)
    q = parse_query("q(sum(v1)) <- A(k1, v1), B(k2, v2), C(k3, v3), E(k4, v4).", schema)
    assert guarantee(build_rwae2(q, D, ics)) == Fraction(1, 16)


@criterion(14, "aggregation constraints are checked but refused by every fix search")
def test_aggregation_constraints_refused(tmp_path, capsys):
    schema = parse_schema("relation R(k: int key, x: int fix)")
    D = Instance(schema, [Fact("R", (1, 4)), Fact("R", (2, 3))])
    ics = parse_constraints("s: AGG sum(x) OF R > 7.", schema)
    assert satisfies(D, ics[0]) is False
    refusals = [
        lambda: ls_fixes(D, ics),
        lambda: ne(D, ics),
        lambda: dfp(D, ics, 5),
        lambda: dfop(D, ics),
        lambda: build_mwscp(D, ics),
        lambda: reduce_1ad(D, ics),
        lambda: enumerate_fixes_1ad(D, ics),
        lambda: cqa(parse_query("q(k) <- R(k, x).", schema), D, ics),
    ]
    for attempt in refusals:
        with pytest.raises(UnsupportedConstraint):
            attempt()
    (tmp_path / "schema.txt").write_text("relation R(k: int key, x: int fix)\n")
    (tmp_path / "R.csv").write_text("k,x\n1,4\n2,3\n")
    (tmp_path / "ic.txt").write_text("s: AGG sum(x) OF R > 7.\n")
    argv = ["--schema", str(tmp_path / "schema.txt"), "--data", str(tmp_path), "--ic", str(tmp_path / "ic.txt")]
    assert run(["check", *argv]) == 1
    assert run(["fix", *argv]) == 3
    capsys.readouterr()
