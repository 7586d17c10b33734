"""Shared fixtures: sample loading, random instance generators, brute-force oracles."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from pathlib import Path

from lsfix.cqa import cqa_range, enumerate_fixes_1ad
from lsfix.errors import NoFixExists
from lsfix.exact import ls_fixes
from lsfix.gf2 import assignment_to_fix, build_rwae2, derandomize, exhaustive_optimum, guarantee
from lsfix.io import read_instance
from lsfix.model import Fact, Instance, fact_distance
from lsfix.parser import parse_constraints, parse_query, parse_schema
from lsfix.repair import (
    CandidateGrid,
    conflict_hypergraph,
    is_1ad,
    is_local,
    local_fixes,
    resolved_by,
    satisfies_all,
)

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def load(name: str, ic_file: str = "ic.txt"):
    d = SAMPLES / name
    schema = parse_schema((d / "schema.txt").read_text())
    ics = parse_constraints((d / ic_file).read_text(), schema)
    return schema, read_instance(schema, d), ics


def query(name: str, file: str, schema):
    return parse_query((SAMPLES / name / file).read_text(), schema)


# -- random instances ---------------------------------------------------------------

RANDOM_SCHEMA = """
relation P(k: int key, r: int, a: int fix weight {wa}, b: int fix weight {wb})
relation Q(k: int key, r: int, c: int fix weight {wc})
"""

FIXABLE = {"P": ["a", "b"], "Q": ["c"]}


def _schema(rng: random.Random):
    ws = [rng.choice(["1", "2", "1/2"]) for _ in range(3)]
    return parse_schema(RANDOM_SCHEMA.format(wa=ws[0], wb=ws[1], wc=ws[2]))


def _facts(rng, schema, n_tuples, lo, hi):
    facts = []
    keys = {"P": rng.sample(range(1, 10), 9), "Q": rng.sample(range(1, 10), 9)}
    for _ in range(n_tuples):
        rel = rng.choice(["P", "Q"])
        k = keys[rel].pop()
        r = rng.randint(0, 2)
        vals = [rng.randint(lo, hi) for _ in FIXABLE[rel]]
        facts.append(Fact(rel, (k, r, *vals)))
    return Instance(schema, facts)


def _atom(rel, suffix):
    if rel == "P":
        return f"P(k{suffix}, r{suffix}, a{suffix}, b{suffix})", [f"a{suffix}", f"b{suffix}"]
    return f"Q(k{suffix}, r{suffix}, c{suffix})", [f"c{suffix}"]


def random_local_instance(rng: random.Random, max_tuples=6, max_ics=3, lo=-8, hi=8):
    """Local denials: distinct relations per denial, joins on rigid attributes, one direction per fixable attribute."""
    schema = _schema(rng)
    D = _facts(rng, schema, rng.randint(1, max_tuples), lo, hi)
    direction = {(rel, a): rng.choice("<>") for rel, attrs in FIXABLE.items() for a in attrs}
    lines = []
    for i in range(rng.randint(1, max_ics)):
        rels = [rng.choice("PQ")] if rng.random() < 0.5 else rng.sample("PQ", 2)
        atoms, comps = [], []
        fix_vars = []
        for j, rel in enumerate(rels):
            text, fv = _atom(rel, str(j))
            atoms.append(text)
            fix_vars += [(rel, v) for v in fv]
        if len(rels) == 2:
            comps.append("r0 = r1" if rng.random() < 0.7 else f"k1 {rng.choice(['<', '>', '!='])} {rng.randint(1, 9)}")
        picks = [rng.choice(fix_vars) for _ in range(rng.randint(1, 2))]
        for rel, var in picks:
            d = direction[(rel, var[0])]
            op = rng.choice(["<", "<="] if d == "<" else [">", ">="])
            comps.append(f"{var} {op} {rng.randint(lo, hi)}")
        if rng.random() < 0.3:
            comps.append(f"r0 {rng.choice(['=', '!=', '<'])} {rng.randint(0, 2)}")
        lines.append(f"ic{i}: DENY {', '.join(atoms + comps)}.")
    ics = parse_constraints("\n".join(lines), schema)
    assert is_local(ics, schema)[0], lines
    return schema, D, ics


def random_1ad_instance(rng: random.Random, max_tuples=5, max_ics=3, lo=0, hi=8, two_sided=True):
    """Single-atom denials with arbitrary constant comparisons on fixable attributes."""
    schema = _schema(rng)
    D = _facts(rng, schema, rng.randint(1, max_tuples), lo, hi)
    lines = []
    for i in range(rng.randint(1, max_ics)):
        rel = rng.choice("PQ")
        text, fv = _atom(rel, "")
        comps = []
        for _ in range(rng.randint(1, 2)):
            ops = ["<", ">", "<=", ">=", "!=", "="] if two_sided else ["<", ">"]
            comps.append(f"{rng.choice(fv)} {rng.choice(ops)} {rng.randint(lo + 1, hi)}")
        if rng.random() < 0.3:
            comps.append(f"r {rng.choice(['=', '!='])} {rng.randint(0, 2)}")
        lines.append(f"ic{i}: DENY {', '.join([text] + comps)}.")
    ics = parse_constraints("\n".join(lines), schema)
    assert is_1ad(ics)
    return schema, D, ics


SUM_QUERIES = [
    "q(sum(a)) <- P(k, r, a, b).",
    "q(sum(c)) <- P(k, r, a, b), Q(j, r, c).",
    "q(sum(b)) <- P(k, r, a, b), Q(j, s, c), a <= c.",
]

TIE_SCHEMA = parse_schema(
    "relation P(k: int key, r: int, a: int fix, b: int fix)\nrelation Q(k: int key, r: int, c: int fix)"
)


def tied_1ad_instance(rng: random.Random):
    """Unit weights and values in a narrow band, so cheapest fixes often tie."""
    facts = [Fact("P", (k, rng.randint(0, 1), rng.randint(1, 4), rng.randint(1, 4))) for k in range(rng.randint(1, 3))]
    facts += [Fact("Q", (k, rng.randint(0, 1), rng.randint(1, 4))) for k in range(rng.randint(1, 2))]
    lines = []
    for i in range(rng.randint(1, 3)):
        kind = rng.randint(0, 2)
        if kind == 0:
            body = f"P(k, r, a, b), {rng.choice('ab')} = {rng.randint(1, 4)}"
        elif kind == 1:
            body = f"P(k, r, a, b), a > {rng.randint(1, 3)}, b > {rng.randint(1, 3)}"
        else:
            body = f"Q(k, r, c), c = {rng.randint(1, 4)}"
        lines.append(f"t{i}: DENY {body}.")
    return TIE_SCHEMA, Instance(TIE_SCHEMA, facts), parse_constraints("\n".join(lines), TIE_SCHEMA)


def random_sum_case(seed: int):
    """A sum query over a single-atom instance that has fixes, with its equation system."""
    rng = random.Random(seed)
    gen = tied_1ad_instance if seed % 2 else (lambda r: random_1ad_instance(r, max_tuples=4))
    while True:
        schema, D, ics = gen(rng)
        q = parse_query(SUM_QUERIES[seed % len(SUM_QUERIES)], schema)
        try:
            return q, D, ics, build_rwae2(q, D, ics)
        except NoFixExists:
            continue


# -- checks shared by unit and acceptance tests ------------------------------------------


def check_sum_approximation(q, D, ics, system):
    trace = []
    sel, w = derandomize(system, trace)
    opt_sel, opt = exhaustive_optimum(system)
    assert guarantee(system) * opt <= trace[0] <= w <= opt
    assert all(a <= b for a, b in zip(trace, trace[1:]))
    assert trace[-1] == w
    assert opt == cqa_range(q, D, ics)[1]
    fixes = set(enumerate_fixes_1ad(D, ics))
    assert assignment_to_fix(sel, system.bags, D.schema) in fixes
    assert assignment_to_fix(opt_sel, system.bags, D.schema) in fixes


def by_key(D: Instance, f: Fact) -> Fact:
    return D.by_key(f.relation, tuple(f.values[i] for i in D.schema[f.relation].key))


def bounds_own_attribute(ic, t: Fact, schema) -> bool:
    """Whether a built-in of ``ic`` restricts a fixable attribute of the atom ``t`` fills."""
    fixable = schema[t.relation].fixable_positions
    own = {getattr(a.args[p], "name", None) for a in ic.atoms if a.relation == t.relation for p in fixable}
    return any(v in own for c in ic.comparisons if not c.var_var for v in c.variables())


def _edge_signatures(hg, rename=None):
    rename = rename or {}
    return {(e.constraint, frozenset(rename.get(t, t) for t in e.tuples)) for e in hg.edges}


def check_local_fixes_exist(D, ics):
    """Tuples whose own fixable attributes are bounded in every violated constraint have a local fix."""
    hg = conflict_hypergraph(D, ics)
    grid = CandidateGrid(D, ics)
    by_label = {ic.label: ic for ic in ics}
    for e in hg.edges:
        assert any(bounds_own_attribute(by_label[e.constraint], t, D.schema) for t in e.tuples)
    for t in hg.inconsistent_tuples():
        fixes = local_fixes(t, D, ics, hg, grid)
        for lf in fixes:
            assert lf.resolved and lf.cost == fact_distance(D.schema, t, lf.fixed)
        if all(bounds_own_attribute(by_label[e.constraint], t, D.schema) for e in hg.edges_of(t)):
            assert fixes, t


def check_no_new_violations(D, ics):
    hg = conflict_hypergraph(D, ics)
    grid = CandidateGrid(D, ics)
    before = _edge_signatures(hg)
    for t in hg.inconsistent_tuples():
        for lf in local_fixes(t, D, ics, hg, grid):
            D2 = D.replace({t: lf.fixed})
            # name the replacement after the original so edges can be compared
            after = _edge_signatures(conflict_hypergraph(D2, ics), {lf.fixed: t})
            gone = {(e.constraint, e.tuples) for e in lf.resolved}
            assert after <= before - gone, lf


def check_fixes_are_local_fixes(D, ics, fixes=None):
    hg = conflict_hypergraph(D, ics)
    grid = CandidateGrid(D, ics)
    by_label = {ic.label: ic for ic in ics}
    inconsistent = set(hg.inconsistent_tuples())
    for fix in ls_fixes(D, ics).fixes if fixes is None else fixes:
        for t in D:
            new = by_key(fix, t)
            if new == t:
                continue
            assert t in inconsistent
            assert resolved_by(t, new, hg.edges_of(t), by_label)
            assert new in {lf.fixed for lf in local_fixes(t, D, ics, hg, grid)}


def check_border_values(D, ics, fixes=None):
    grid = CandidateGrid(D, ics)
    for fix in ls_fixes(D, ics).fixes if fixes is None else fixes:
        for t in D:
            new = by_key(fix, t)
            for pos in D.schema[t.relation].fixable_positions:
                v = new.values[pos]
                assert v == t.values[pos] or grid.is_border_value(t, pos, v)


# -- oracles ------------------------------------------------------------------------


def brute_force_fixes(D: Instance, ics, lo: int, hi: int):
    """All minimum-distance fixes by scanning every fixable cell over [lo, hi]."""
    schema = D.schema
    facts = list(D)
    cells = [(i, p) for i, f in enumerate(facts) for p in schema[f.relation].fixable_positions]
    best, found = None, []
    for combo in itertools.product(range(lo, hi + 1), repeat=len(cells)):
        updates: dict[int, dict[int, int]] = {}
        for (i, p), v in zip(cells, combo):
            updates.setdefault(i, {})[p] = v
        new = [f.with_values(updates.get(i, {})) for i, f in enumerate(facts)]
        d = sum((fact_distance(schema, f, g) for f, g in zip(facts, new)), Fraction(0))
        if best is not None and d > best:
            continue
        if not satisfies_all(new, ics):
            continue
        if best is None or d < best:
            best, found = d, [Instance(schema, new)]
        else:
            found.append(Instance(schema, new))
    return best, found


def brute_force_cover(ci):
    """Minimum cover weight and every optimal id set, by subset enumeration."""
    ids = [s.id for s in ci.sets]
    universe = set(ci.elements)
    best, covers = None, []
    for r in range(len(ids) + 1):
        for combo in itertools.combinations(ci.sets, r):
            covered = set().union(*(s.members for s in combo)) if combo else set()
            if covered != universe:
                continue
            w = sum((ci.weights[s.id] for s in combo), Fraction(0))
            if best is None or w < best:
                best, covers = w, [frozenset(s.id for s in combo)]
            elif w == best:
                covers.append(frozenset(s.id for s in combo))
    return best, covers
