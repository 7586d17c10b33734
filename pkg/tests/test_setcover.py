import math
import random
from collections import Counter
from fractions import Fraction

import pytest

from helpers import brute_force_cover, load, random_local_instance
from lsfix.errors import CapExceeded, InfeasibleCover, NonLocalConstraints
from lsfix.exact import ls_fixes
from lsfix.model import Fact, Instance, distance
from lsfix.repair import satisfies_all
from lsfix.setcover import (
    Cover,
    CoverInstance,
    apply_cover,
    build_mwscp,
    exact_cover,
    greedy_cover,
    optimal_covers,
    primal_dual_cover,
    star_normalize,
)

T1 = Fact("Client", (1, 15, 52))
T2 = Fact("Client", (2, 16, 51))
T4 = Fact("Buy", (1, "CD", 27))
T5 = Fact("Buy", (1, "DVD", 26))
EDGES = {
    "A": frozenset({T1, T4}),
    "B": frozenset({T1}),
    "C": frozenset({T1, T5}),
    "D": frozenset({T2}),
}


@pytest.fixture(scope="module")
def clients():
    schema, D, ics = load("clients")
    return schema, D, ics, build_mwscp(D, ics)


def cover_of(ci, *ids):
    return Cover(frozenset(ids), sum((ci.weights[i] for i in ids), Fraction(0)))


def letters(ci, s):
    by_tuples = {v: k for k, v in EDGES.items()}
    return {by_tuples[ci.hyperedges[e].tuples] for e in s.members}


def fix_pair(D):
    d1 = D.replace(
        {
            T1: Fact("Client", (1, 15, 50)),
            T2: Fact("Client", (2, 16, 50)),
            T4: Fact("Buy", (1, "CD", 25)),
            T5: Fact("Buy", (1, "DVD", 25)),
        }
    )
    d2 = D.replace({T1: Fact("Client", (1, 18, 52)), T2: Fact("Client", (2, 16, 50))})
    return d1, d2


def test_build_incidence_table(clients):
    _, D, _, ci = clients
    assert len(ci.elements) == 4
    assert [s.name for s in ci.sets] == ["S1", "S2", "S3", "S4", "S5"]
    assert [ci.weights[s.id] for s in ci.sets] == [4, 9, 1, 4, 1]
    assert [s.owner for s in ci.sets] == [T1, T1, T2, T4, T5]
    assert [letters(ci, s) for s in ci.sets] == [{"B"}, {"A", "B", "C"}, {"D"}, {"A"}, {"C"}]
    assert ci.is_feasible()
    assert ci.frequency() == 2


def test_consistent_instance_gives_empty_problem(clients):
    schema, _, ics, _ = clients
    C = Instance(schema, [Fact("Client", (3, 60, 900))])
    ci = build_mwscp(C, ics)
    assert ci.elements == () and ci.sets == ()
    for solve in (greedy_cover, primal_dual_cover, exact_cover):
        c = solve(ci)
        assert c.chosen == frozenset() and c.weight == 0
    assert apply_cover(C, exact_cover(ci), ci) == C


def test_non_local_rejected():
    _, D, ics = load("no_fix")
    with pytest.raises(NonLocalConstraints):
        build_mwscp(D, ics)


def test_greedy_trace(clients):
    _, D, _, ci = clients
    c = greedy_cover(ci)
    assert [step["chosen"] for step in c.trace] == ["S3", "S5", "S1", "S4"]
    assert [step["ratio"] for step in c.trace] == [1, 1, Fraction(1, 4), Fraction(1, 4)]
    assert c.chosen == {3, 5, 1, 4}
    assert c.weight == 10
    d1, _ = fix_pair(D)
    assert apply_cover(D, c, ci) == d1


def test_exact_covers(clients):
    _, _, _, ci = clients
    covers = optimal_covers(ci)
    assert [sorted(c.chosen) for c in covers] == [[1, 3, 4, 5], [2, 3]]
    assert all(c.weight == 10 for c in covers)
    assert exact_cover(ci).chosen == {1, 3, 4, 5}
    with pytest.raises(CapExceeded):
        exact_cover(ci, max_sets=4)


def test_primal_dual(clients):
    _, _, _, ci = clients
    c = primal_dual_cover(ci)
    assert c.weight <= 2 * 10
    covered = set().union(*(ci.set_by_id(i).members for i in c.chosen))
    assert covered == set(ci.elements)
    assert all("dual" in step for step in c.trace)


def test_star_normalize(clients):
    schema, D, ics, ci = clients
    merged = star_normalize(cover_of(ci, 1, 2), ci, D, ics)
    assert merged.chosen == {2} and merged.weight == 9
    full = star_normalize(cover_of(ci, 1, 2, 3), ci, D, ics)
    assert full.chosen == {2, 3}
    single = cover_of(ci, 2, 3)
    assert star_normalize(single, ci, D, ics) is single
    assert star_normalize(full, ci, D, ics).chosen == full.chosen


def test_apply_cover(clients):
    _, D, _, ci = clients
    d1, d2 = fix_pair(D)
    assert apply_cover(D, cover_of(ci, 2, 3), ci) == d2
    assert apply_cover(D, cover_of(ci, 1, 3, 4, 5), ci) == d1
    with pytest.raises(ValueError):
        apply_cover(D, cover_of(ci, 1, 2, 3), ci)


def test_infeasible_instance_rejected(clients):
    _, _, _, ci = clients
    broken = CoverInstance(ci.elements, ci.hyperedges, ci.sets[:2], ci.weights)
    for solve in (greedy_cover, primal_dual_cover, exact_cover):
        with pytest.raises(InfeasibleCover):
            solve(broken)


# -- random local instances ----------------------------------------------------------


def corpus(n, start=0):
    for seed in range(start, start + n):
        yield seed, random_local_instance(random.Random(seed))


@pytest.mark.parametrize("seed,inst", list(corpus(60)))
def test_solvers_against_subset_oracle(seed, inst):
    schema, D, ics = inst
    ci = build_mwscp(D, ics)
    assert ci.is_feasible()
    best, covers = brute_force_cover(ci)
    exact = optimal_covers(ci, max_sets=30)
    assert {c.chosen for c in exact} == set(covers)
    assert all(c.weight == best for c in exact)
    g = greedy_cover(ci)
    n = max(len(ci.elements), 1)
    assert best <= g.weight <= (1 + math.log(n)) * best
    pd = primal_dual_cover(ci)
    assert best <= pd.weight <= ci.frequency() * best


@pytest.mark.parametrize("seed,inst", list(corpus(60, 100)))
def test_any_cover_repairs_the_instance(seed, inst):
    schema, D, ics = inst
    ci = build_mwscp(D, ics)
    for c in (greedy_cover(ci), primal_dual_cover(ci), exact_cover(ci, max_sets=30)):
        star = star_normalize(c, ci, D, ics)
        assert star.weight <= c.weight
        assert star_normalize(star, ci, D, ics).chosen == star.chosen
        fixed = apply_cover(D, star, ci)
        assert satisfies_all(fixed, ics)
        assert distance(D, fixed) == star.weight


@pytest.mark.parametrize("seed,inst", list(corpus(60, 200)))
def test_optimal_covers_are_the_fixes(seed, inst):
    schema, D, ics = inst
    ci = build_mwscp(D, ics)
    r = ls_fixes(D, ics)
    covers = optimal_covers(ci, max_sets=30)
    assert covers[0].weight == r.min_distance
    got = {apply_cover(D, star_normalize(c, ci, D, ics), ci) for c in covers}
    assert got == set(r.fixes)


@pytest.mark.parametrize("seed,inst", list(corpus(60, 300)))
def test_set_count_per_tuple(seed, inst):
    schema, D, ics = inst
    ci = build_mwscp(D, ics)
    for t, n in Counter(s.owner for s in ci.sets).items():
        assert n <= len(schema[t.relation].fixable_positions) * len(ics)
